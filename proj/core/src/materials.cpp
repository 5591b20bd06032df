#include "roomir/materials.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

namespace roomir::materials {

namespace {

const std::array<std::string, kBandCount> kAbsorptionColumns = {"a63",   "a125",  "a250",  "a500",
                                                                 "a1000", "a2000", "a4000", "a8000"};
const std::array<std::string, kBandCount> kScatteringColumns = {"s63",   "s125",  "s250",  "s500",
                                                                "s1000", "s2000", "s4000", "s8000"};

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  for (auto& f : fields) {
    const auto b = f.find_first_not_of(" \t");
    const auto e = f.find_last_not_of(" \t");
    f = b == std::string::npos ? std::string{} : f.substr(b, e - b + 1);
  }
  return fields;
}

double unit_uniform(std::mt19937_64& gen) { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

double standard_normal(std::mt19937_64& gen) {
  // Box-Muller on the portable uniform; avoids implementation-defined distributions.
  const double u1 = 1.0 - unit_uniform(gen);
  const double u2 = unit_uniform(gen);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

}  // namespace

std::vector<MaterialRecord> parse_material_db(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error("material db is empty");
  const auto header = split_csv(line);
  auto column = [&](const std::string& name) -> std::optional<std::size_t> {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto name_col = column("name");
  if (!name_col) throw Error("material db: missing column 'name'");
  std::array<std::size_t, kBandCount> abs_cols{};
  for (int b = 0; b < kBandCount; ++b) {
    const auto c = column(kAbsorptionColumns[b]);
    if (!c) throw Error("material db: missing column '" + kAbsorptionColumns[b] + "'");
    abs_cols[b] = *c;
  }
  std::optional<std::array<std::size_t, kBandCount>> sca_cols;
  int sca_found = 0;
  for (int b = 0; b < kBandCount; ++b) sca_found += column(kScatteringColumns[b]).has_value();
  if (sca_found == kBandCount) {
    sca_cols.emplace();
    for (int b = 0; b < kBandCount; ++b) (*sca_cols)[b] = *column(kScatteringColumns[b]);
  } else if (sca_found != 0) {
    throw Error("material db: scattering columns must be all present or all absent");
  }

  std::vector<MaterialRecord> out;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto f = split_csv(line);
    if (f.size() < header.size()) {
      throw Error("material db row " + std::to_string(row) + ": expected " + std::to_string(header.size()) +
                  " fields, got " + std::to_string(f.size()));
    }
    auto coefficient = [&](std::size_t col) {
      double v = 0.0;
      const std::string& s = f[col];
      auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc{} || ptr != s.data() + s.size() || !(v >= 0.0 && v <= 1.0)) {
        throw Error("material db row " + std::to_string(row) + ", column " + header[col] + ": value '" + s +
                    "' is not a coefficient in [0,1]");
      }
      return v;
    };
    MaterialRecord rec;
    rec.name = f[*name_col];
    if (rec.name.empty()) throw Error("material db row " + std::to_string(row) + ": empty name");
    for (int b = 0; b < kBandCount; ++b) rec.absorption[b] = coefficient(abs_cols[b]);
    if (sca_cols) {
      BandSpectrum s{};
      for (int b = 0; b < kBandCount; ++b) s[b] = coefficient((*sca_cols)[b]);
      rec.scattering = s;
    }
    out.push_back(std::move(rec));
  }
  if (out.empty()) throw Error("material db has no material rows");
  return out;
}

std::vector<MaterialRecord> load_material_db(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open material db " + path.string());
  return parse_material_db(in);
}

void EmbeddingTable::validate() const {
  if (dimension == 0) throw Error("embedding dimension must be positive");
  for (const auto& [name, vec] : entries) {
    if (vec.size() != dimension) {
      throw Error("embedding '" + name + "' has dimension " + std::to_string(vec.size()) + ", expected " +
                  std::to_string(dimension));
    }
    if (!std::all_of(vec.begin(), vec.end(), [](double v) { return std::isfinite(v); })) {
      throw Error("embedding '" + name + "' has non-finite components");
    }
  }
}

EmbeddingTable parse_embedding_table(std::string_view json_text) {
  EmbeddingTable table;
  try {
    const auto j = nlohmann::json::parse(json_text);
    table.dimension = j.at("dimension").get<std::size_t>();
    for (const auto& [name, vec] : j.at("entries").items()) {
      table.entries[name] = vec.get<std::vector<double>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("embedding table: ") + e.what());
  }
  table.validate();
  return table;
}

EmbeddingTable load_embedding_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open embedding table " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_embedding_table(ss.str());
}

Embedding fallback_embed(std::string_view text, std::size_t dimension) {
  Embedding v(dimension, 0.0);
  std::string s;
  for (char c : text) s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return v;
  const auto e = s.find_last_not_of(" \t\r\n");
  s = " " + s.substr(b, e - b + 1) + " ";
  for (std::size_t i = 0; i + 3 <= s.size(); ++i) {
    v[fnv1a(std::string_view(s).substr(i, 3)) % dimension] += 1.0;
  }
  const double n = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
  for (double& x : v) x /= n;
  return v;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error("cosine similarity of vectors with different dimensions");
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa == 0.0 || bb == 0.0) return 0.0;
  // Snapping to a 1e-12 grid removes the last-bit noise that rescaling a vector
  // introduces, so weights are exactly invariant to positive scale factors.
  const double c = std::clamp(ab / (std::sqrt(aa) * std::sqrt(bb)), -1.0, 1.0);
  return std::round(c * 1e12) / 1e12;
}

AssignmentDistribution distribution_from_embeddings(std::span<const double> label,
                                                    const std::vector<Embedding>& materials) {
  if (materials.empty()) throw Error("material list is empty");
  AssignmentDistribution d;
  d.weights.reserve(materials.size());
  for (const auto& m : materials) d.weights.push_back(std::max(0.0, cosine_similarity(label, m)));
  const double total = std::accumulate(d.weights.begin(), d.weights.end(), 0.0);
  if (total > 0.0) {
    for (double w : d.weights) d.probabilities.push_back(w / total);
  } else {
    d.probabilities.assign(materials.size(), 1.0 / static_cast<double>(materials.size()));
  }
  return d;
}

AssignmentDistribution assignment_distribution(const std::string& label,
                                               const std::vector<MaterialRecord>& materials,
                                               const EmbeddingTable* table) {
  if (materials.empty()) throw Error("material list is empty");
  bool use_table = table != nullptr && table->find(label) != nullptr;
  for (std::size_t i = 0; use_table && i < materials.size(); ++i) {
    use_table = table->find(materials[i].name) != nullptr;
  }
  std::vector<Embedding> vecs;
  vecs.reserve(materials.size());
  if (use_table) {
    for (const auto& m : materials) vecs.push_back(*table->find(m.name));
    return distribution_from_embeddings(*table->find(label), vecs);
  }
  for (const auto& m : materials) vecs.push_back(fallback_embed(m.name));
  return distribution_from_embeddings(fallback_embed(label), vecs);
}

std::size_t sample_assignment(const AssignmentDistribution& dist, std::uint64_t seed) {
  if (dist.probabilities.empty()) throw Error("empty distribution");
  std::mt19937_64 gen(mix_seed(seed));
  const double u = unit_uniform(gen);
  double cdf = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < dist.probabilities.size(); ++i) {
    if (dist.probabilities[i] <= 0.0) continue;
    last_positive = i;
    cdf += dist.probabilities[i];
    if (u < cdf) return i;
  }
  return last_positive;
}

ScatteringPrior default_scattering_prior() {
  ScatteringPrior p;
  for (int b = 0; b < kBandCount; ++b) {
    if (b < kLowScatteringBands) {
      p.mean[b] = 0.03;
      p.stddev[b] = 0.01;
    } else {
      p.mean[b] = 0.3;
      p.stddev[b] = 0.15;
    }
  }
  return p;
}

BandSpectrum sample_scattering(const ScatteringPrior& prior, std::uint64_t seed) {
  std::mt19937_64 gen(mix_seed(seed, 0x5ca7ULL));
  BandSpectrum s{};
  for (int b = 0; b < kBandCount; ++b) {
    if (prior.stddev[b] < 0.0) throw Error("scattering prior stddev must be non-negative");
    const double z = standard_normal(gen);
    double v = std::clamp(prior.mean[b] + prior.stddev[b] * z, 0.0, 1.0);
    if (b < kLowScatteringBands) v = std::min(v, kLowBandScatteringCap);
    s[b] = v;
  }
  return s;
}

std::vector<SurfaceMaterial> assign_labels(const std::vector<std::string>& labels,
                                           const std::vector<MaterialRecord>& db, const EmbeddingTable* table,
                                           const ScatteringPrior& prior, std::uint64_t seed) {
  std::vector<SurfaceMaterial> out;
  out.reserve(labels.size());
  for (const auto& label : labels) {
    SurfaceMaterial s;
    s.label = label;
    s.seed = mix_seed(seed, fnv1a(label));
    auto dist = assignment_distribution(label, db, table);
    s.material_index = sample_assignment(dist, s.seed);
    s.probability = dist.probabilities[s.material_index];
    const MaterialRecord& rec = db[s.material_index];
    s.material = rec.name;
    s.absorption = rec.absorption;
    s.scattering = rec.scattering ? *rec.scattering : sample_scattering(prior, s.seed);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace roomir::materials
