#include "roomir/pipeline.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "roomir/analysis.hpp"
#include "roomir/dsp.hpp"
#include "roomir/scene.hpp"
#include "roomir/wav.hpp"

namespace roomir::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_text(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("cannot write " + path.string());
  os << text;
  if (!os) throw Error("failed writing " + path.string());
}

// Reads keys from a JSON object and rejects any key that was not consumed.
class Reader {
 public:
  Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw Error(where_ + ": expected an object");
  }
  template <typename T>
  void opt(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw Error(where_ + "." + key + ": " + e.what());
    }
  }
  bool has(const char* key) {
    seen_.insert(key);
    return j_.contains(key);
  }
  const json& at(const char* key) const { return j_.at(key); }
  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) throw Error(where_ + ": unknown key '" + k + "'");
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

json vec_json(Vec3 v) { return json::array({v.x, v.y, v.z}); }
Vec3 vec_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

fs::path resolve(const fs::path& base, const fs::path& p) { return p.is_absolute() || base.empty() ? p : base / p; }

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

struct PreparedScene {
  std::string id;
  scene::TriangleMesh mesh;  // triangle_material indexes `labels`
  std::vector<ga::Surface> surfaces;
  std::vector<MaterialChoice> materials;
  scene::VoxelGrid grid;
  scene::PlacementSet placements;
  std::vector<std::size_t> pairs;
  double volume = 0.0;
  std::optional<std::string> error;
};

std::vector<std::string> scene_ids(const std::vector<fs::path>& scenes) {
  std::vector<std::string> ids;
  std::map<std::string, int> used;
  for (const auto& p : scenes) {
    std::string id = p.stem().string();
    if (const int n = used[id]++; n > 0) id += "_" + std::to_string(n);
    ids.push_back(id);
  }
  return ids;
}

// Loads a scene and remaps triangle materials onto its sorted object labels.
PreparedScene load_scene(const fs::path& path, const std::string& id, const PipelineConfig& cfg,
                         const std::vector<materials::MaterialRecord>& db, const materials::EmbeddingTable* table) {
  PreparedScene s;
  s.id = id;
  s.mesh = scene::load_mesh(path).mesh;
  std::set<std::string> unique(s.mesh.object_labels.begin(), s.mesh.object_labels.end());
  std::vector<std::string> labels(unique.begin(), unique.end());
  std::map<std::string, std::uint32_t> index;
  for (std::uint32_t i = 0; i < labels.size(); ++i) index[labels[i]] = i;
  for (std::size_t t = 0; t < s.mesh.size(); ++t) s.mesh.triangle_material[t] = index[s.mesh.object_labels[t]];
  s.mesh.material_names = labels;

  const std::uint64_t scene_seed = mix_seed(cfg.rng_seed, fnv1a(id));
  const auto assigned = materials::assign_labels(labels, db, table, cfg.scattering_prior, scene_seed);
  for (const auto& a : assigned) {
    s.surfaces.push_back({a.absorption, a.scattering});
    s.materials.push_back({a.label, a.material, a.seed, a.probability});
  }
  s.volume = scene::is_closed(s.mesh) ? scene::enclosed_volume(s.mesh) : 0.0;
  return s;
}

void prepare_geometry(PreparedScene& s, const PipelineConfig& cfg) {
  try {
    s.placements = scene::sample_placements(s.mesh, cfg.grid_spacing, cfg.clearance);
  } catch (const Error& e) {
    s.error = std::string("placement: ") + e.what();
    return;
  }
  const std::size_t total = s.placements.pairs.size();
  std::vector<std::size_t> idx(total);
  for (std::size_t i = 0; i < total; ++i) idx[i] = i;
  const std::size_t take = std::min<std::size_t>(total, static_cast<std::size_t>(cfg.pair_cap));
  std::mt19937_64 gen(mix_seed(cfg.rng_seed, fnv1a("pairs:" + s.id)));
  for (std::size_t i = 0; i < take; ++i) std::swap(idx[i], idx[i + gen() % (total - i)]);
  s.pairs.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(take));
  std::sort(s.pairs.begin(), s.pairs.end());
}

void voxelize_scene(PreparedScene& s, const PipelineConfig& cfg) {
  scene::VoxelizeOptions opt;
  for (const auto& surf : s.surfaces) opt.material_admittance.push_back(scene::admittance_from_absorption(surf.absorption));
  try {
    s.grid = scene::voxelize(s.mesh, fdtd::derive_grid_params(cfg.fdtd).dx, opt);
  } catch (const Error& e) {
    s.error = std::string("voxelize: ") + e.what();
  }
}

ManifestEntry entry_skeleton(const PreparedScene& s, std::size_t pair_index) {
  ManifestEntry e;
  e.scene_id = s.id;
  e.pair_index = pair_index;
  e.materials = s.materials;
  e.scene_volume = s.volume;
  if (!s.error && pair_index < s.placements.pairs.size()) {
    const auto [si, ri] = s.placements.pairs[pair_index];
    e.source = s.placements.sources[si];
    e.receiver = s.placements.receivers[ri];
    e.distance = roomir::distance(e.source, e.receiver);
  }
  return e;
}

std::string pair_stem(const ManifestEntry& e) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "pair_%04zu", e.pair_index);
  return e.scene_id + "/" + buf;
}

ManifestEntry run_pair(const PreparedScene& s, std::size_t pair_index, const PipelineConfig& cfg,
                       const calibrate::CalibrationResult& cal, int ga_threads) {
  ManifestEntry e = entry_skeleton(s, pair_index);
  e.eta_w = cal.eta_w;
  e.eta_g = cal.eta_g;
  e.eta_combined = cal.eta_combined;
  const std::uint64_t pair_seed = mix_seed(mix_seed(cfg.rng_seed, fnv1a(s.id)), pair_index);

  const ImpulseResponse fdtd_ir = fdtd_impulse_response(s.grid, e.source, e.receiver, cfg.fdtd, cfg.sample_rate);

  ga::GaConfig gcfg = cfg.ga;
  gcfg.sample_rate = cfg.sample_rate;
  gcfg.rng_seed = pair_seed;
  gcfg.threads = ga_threads;
  const auto hist = ga::trace(s.mesh, s.surfaces, e.source, e.receiver, gcfg);
  const ImpulseResponse ga_ir = ga::synthesize_ir(hist, gcfg, mix_seed(pair_seed, 1));

  const ImpulseResponse hybrid_ir = hybrid::combine(fdtd_ir, ga_ir, cal.eta_combined, cfg.crossover);
  const auto decay = analysis::schroeder_edc(hybrid_ir);
  e.rt60 = decay.rt60;
  e.rt60_fit_failed = decay.fit_failed;
  double peak = 0.0;
  for (double v : hybrid_ir.samples) peak = std::max(peak, std::abs(v));
  e.peak_gain = peak > 0.0 ? 1.0 / peak : 0.0;

  ImpulseResponse fdtd_cal = fdtd_ir;
  for (double& v : fdtd_cal.samples) v *= cal.eta_combined;
  const std::string stem = pair_stem(e);
  e.ga_wav = stem + "_ga.wav";
  e.fdtd_wav = stem + "_fdtd.wav";
  e.hybrid_wav = stem + "_hybrid.wav";
  wav::write(ga_ir, cfg.output_dir / e.ga_wav);
  wav::write(fdtd_cal, cfg.output_dir / e.fdtd_wav);
  wav::write(hybrid_ir, cfg.output_dir / e.hybrid_wav);
  return e;
}

std::mutex& cache_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

void PipelineConfig::validate() const {
  if (scenes.empty()) throw Error("config: no scenes given");
  for (const auto& s : scenes) {
    if (!fs::is_regular_file(s)) throw Error("config: scene file not found: " + s.string());
  }
  if (!fs::is_regular_file(material_db)) throw Error("config: material database not found: " + material_db.string());
  if (embeddings && !fs::is_regular_file(*embeddings)) throw Error("config: embedding file not found: " + embeddings->string());
  if (output_dir.empty()) throw Error("config: output_dir must be set");
  const double top_edge = kOctaveCenters.back() * std::sqrt(2.0);
  if (!(sample_rate >= 2.0 * top_edge)) {
    throw Error("config: sample_rate must be at least " + std::to_string(2.0 * top_edge) + " Hz");
  }
  ga::GaConfig g = ga;
  g.sample_rate = sample_rate;
  g.validate();
  fdtd.validate();
  crossover.validate(sample_rate);
  calibration.validate();
  if (!(grid_spacing > 0.0)) throw Error("config: grid_spacing must be positive");
  if (clearance < 0.0) throw Error("config: clearance must be non-negative");
  if (max_parallel < 1) throw Error("config: max_parallel must be >= 1");
  if (pair_cap < 1) throw Error("config: pair_cap must be >= 1");
}

PipelineConfig PipelineConfig::from_json(const std::string& text, const fs::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("config: invalid JSON: ") + e.what());
  }
  PipelineConfig c;
  Reader r(j, "config");
  std::string profile = "full";
  r.opt("profile", profile);
  if (profile == "desk") {
    c.fdtd.f_max = 350.0;
    c.crossover.crossover_freq = 350.0;
  } else if (profile != "full") {
    throw Error("config.profile: expected 'full' or 'desk', got '" + profile + "'");
  }

  std::vector<std::string> scenes;
  r.opt("scenes", scenes);
  for (const auto& s : scenes) c.scenes.push_back(resolve(base_dir, s));
  std::string path;
  if (r.has("material_db")) {
    r.opt("material_db", path);
    c.material_db = resolve(base_dir, path);
  }
  if (r.has("embeddings") && !r.at("embeddings").is_null()) {
    r.opt("embeddings", path);
    c.embeddings = resolve(base_dir, path);
  }
  if (r.has("output_dir")) {
    r.opt("output_dir", path);
    c.output_dir = resolve(base_dir, path);
  }
  r.opt("sample_rate", c.sample_rate);
  r.opt("rng_seed", c.rng_seed);
  r.opt("max_parallel", c.max_parallel);
  r.opt("pair_cap", c.pair_cap);

  if (r.has("placement")) {
    Reader p(r.at("placement"), "config.placement");
    p.opt("grid_spacing", c.grid_spacing);
    p.opt("clearance", c.clearance);
    p.finish();
  }
  if (r.has("ga")) {
    Reader g(r.at("ga"), "config.ga");
    g.opt("ray_count", c.ga.ray_count);
    g.opt("max_depth", c.ga.max_depth);
    g.opt("energy_floor", c.ga.energy_floor);
    g.opt("duration", c.ga.duration);
    g.opt("speed_of_sound", c.ga.speed_of_sound);
    g.opt("receiver_radius", c.ga.receiver_radius);
    g.opt("bin_width", c.ga.bin_width);
    g.opt("threads", c.ga.threads);
    g.finish();
  }
  if (r.has("fdtd")) {
    Reader f(r.at("fdtd"), "config.fdtd");
    f.opt("f_max", c.fdtd.f_max);
    f.opt("points_per_wavelength", c.fdtd.points_per_wavelength);
    f.opt("duration", c.fdtd.duration);
    f.opt("speed_of_sound", c.fdtd.speed_of_sound);
    f.opt("courant_fraction", c.fdtd.courant_fraction);
    f.finish();
  }
  if (r.has("crossover")) {
    Reader x(r.at("crossover"), "config.crossover");
    x.opt("frequency", c.crossover.crossover_freq);
    x.opt("order", c.crossover.lr_order);
    x.opt("dc_cutoff", c.crossover.dc_cutoff);
    x.finish();
  }
  if (r.has("calibration")) {
    Reader k(r.at("calibration"), "config.calibration");
    k.opt("distance", c.calibration.distance);
    k.opt("receiver_count", c.calibration.receiver_count);
    k.opt("arc_degrees", c.calibration.arc_degrees);
    k.opt("cutoff", c.calibration.cutoff);
    k.opt("truncation_factor", c.calibration.truncation_factor);
    k.opt("margin", c.calibration.margin);
    k.finish();
  }
  if (r.has("scattering_prior")) {
    Reader s(r.at("scattering_prior"), "config.scattering_prior");
    s.opt("mean", c.scattering_prior.mean);
    s.opt("stddev", c.scattering_prior.stddev);
    s.finish();
  }
  r.finish();
  return c;
}

PipelineConfig PipelineConfig::load(const fs::path& path) {
  return from_json(read_text(path), path.parent_path());
}

std::string PipelineConfig::to_json() const {
  json j;
  for (const auto& s : scenes) j["scenes"].push_back(s.string());
  j["material_db"] = material_db.string();
  j["embeddings"] = embeddings ? json(embeddings->string()) : json(nullptr);
  j["output_dir"] = output_dir.string();
  j["sample_rate"] = sample_rate;
  j["rng_seed"] = rng_seed;
  j["max_parallel"] = max_parallel;
  j["pair_cap"] = pair_cap;
  j["placement"] = {{"grid_spacing", grid_spacing}, {"clearance", clearance}};
  j["ga"] = {{"ray_count", ga.ray_count},         {"max_depth", ga.max_depth},
             {"energy_floor", ga.energy_floor},   {"duration", ga.duration},
             {"speed_of_sound", ga.speed_of_sound}, {"receiver_radius", ga.receiver_radius},
             {"bin_width", ga.bin_width},         {"threads", ga.threads}};
  j["fdtd"] = {{"f_max", fdtd.f_max},
               {"points_per_wavelength", fdtd.points_per_wavelength},
               {"duration", fdtd.duration},
               {"speed_of_sound", fdtd.speed_of_sound},
               {"courant_fraction", fdtd.courant_fraction}};
  j["crossover"] = {{"frequency", crossover.crossover_freq}, {"order", crossover.lr_order}, {"dc_cutoff", crossover.dc_cutoff}};
  j["calibration"] = {{"distance", calibration.distance},
                      {"receiver_count", calibration.receiver_count},
                      {"arc_degrees", calibration.arc_degrees},
                      {"cutoff", calibration.cutoff},
                      {"truncation_factor", calibration.truncation_factor},
                      {"margin", calibration.margin}};
  j["scattering_prior"] = {{"mean", scattering_prior.mean}, {"stddev", scattering_prior.stddev}};
  return j.dump(2);
}

std::string PipelineConfig::calibration_key() const {
  const json j = {{"fdtd",
                   {fdtd.f_max, fdtd.points_per_wavelength, fdtd.speed_of_sound, fdtd.courant_fraction}},
                  {"ga", {sample_rate, ga.speed_of_sound}},
                  {"setup",
                   {calibration.distance, calibration.receiver_count, calibration.arc_degrees, calibration.cutoff,
                    calibration.truncation_factor, calibration.margin}}};
  return hex64(fnv1a(j.dump()));
}

void apply_env_overrides(PipelineConfig& cfg) {
  if (const char* dir = std::getenv("ROOMIR_OUTPUT_DIR"); dir && *dir) cfg.output_dir = dir;
  if (const char* jobs = std::getenv("ROOMIR_JOBS"); jobs && *jobs) {
    char* end = nullptr;
    const long n = std::strtol(jobs, &end, 10);
    if (*end != '\0' || n < 1 || n > 4096) throw Error(std::string("ROOMIR_JOBS must be a positive integer, got '") + jobs + "'");
    cfg.max_parallel = static_cast<int>(n);
  }
}

std::string manifest_to_json(const std::vector<ManifestEntry>& entries) {
  json arr = json::array();
  for (const auto& e : entries) {
    json m = json::array();
    for (const auto& c : e.materials) {
      m.push_back({{"label", c.label}, {"material", c.material}, {"seed", c.seed}, {"probability", c.probability}});
    }
    arr.push_back({{"scene_id", e.scene_id},
                   {"pair_index", e.pair_index},
                   {"source", vec_json(e.source)},
                   {"receiver", vec_json(e.receiver)},
                   {"distance", e.distance},
                   {"files", {{"ga", e.ga_wav}, {"fdtd", e.fdtd_wav}, {"hybrid", e.hybrid_wav}}},
                   {"materials", m},
                   {"scene_volume", e.scene_volume},
                   {"rt60", e.rt60},
                   {"rt60_fit_failed", e.rt60_fit_failed},
                   {"eta", {{"eta_w", e.eta_w}, {"eta_g", e.eta_g}, {"eta_combined", e.eta_combined}}},
                   {"peak_gain", e.peak_gain},
                   {"status", e.ok() ? "ok" : "error"},
                   {"error", e.error ? json(*e.error) : json(nullptr)}});
  }
  return arr.dump(2) + "\n";
}

std::vector<ManifestEntry> manifest_from_json(const std::string& text) {
  std::vector<ManifestEntry> out;
  try {
    const json arr = json::parse(text);
    if (!arr.is_array()) throw Error("manifest: expected a JSON array");
    for (const auto& j : arr) {
      ManifestEntry e;
      e.scene_id = j.at("scene_id").get<std::string>();
      e.pair_index = j.at("pair_index").get<std::size_t>();
      e.source = vec_from(j.at("source"));
      e.receiver = vec_from(j.at("receiver"));
      e.distance = j.at("distance").get<double>();
      const auto& f = j.at("files");
      e.ga_wav = f.at("ga").get<std::string>();
      e.fdtd_wav = f.at("fdtd").get<std::string>();
      e.hybrid_wav = f.at("hybrid").get<std::string>();
      for (const auto& m : j.at("materials")) {
        e.materials.push_back({m.at("label").get<std::string>(), m.at("material").get<std::string>(),
                               m.at("seed").get<std::uint64_t>(), m.at("probability").get<double>()});
      }
      e.scene_volume = j.at("scene_volume").get<double>();
      e.rt60 = j.at("rt60").get<double>();
      e.rt60_fit_failed = j.at("rt60_fit_failed").get<bool>();
      const auto& eta = j.at("eta");
      e.eta_w = eta.at("eta_w").get<double>();
      e.eta_g = eta.at("eta_g").get<double>();
      e.eta_combined = eta.at("eta_combined").get<double>();
      e.peak_gain = j.at("peak_gain").get<double>();
      if (!j.at("error").is_null()) e.error = j.at("error").get<std::string>();
      out.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw Error(std::string("manifest: ") + e.what());
  }
  return out;
}

std::vector<ManifestEntry> load_manifest(const fs::path& path) { return manifest_from_json(read_text(path)); }

ImpulseResponse fdtd_impulse_response(const scene::VoxelGrid& grid, Vec3 source, Vec3 receiver,
                                      const fdtd::FdtdConfig& cfg, double sample_rate) {
  fdtd::FdtdConfig run_cfg = cfg;
  run_cfg.output_rate = 0.0;
  const std::vector<double> impulse{1.0};
  const std::vector<Vec3> receivers{receiver};
  ImpulseResponse raw = std::move(fdtd::run(grid, source, receivers, impulse, run_cfg).front());
  ImpulseResponse ir;
  ir.origin = IrOrigin::fdtd;
  ir.sample_rate = sample_rate;
  ir.samples = dsp::resample(raw.samples, raw.sample_rate, sample_rate);
  const double gain = raw.sample_rate / sample_rate;
  for (double& v : ir.samples) v *= gain;
  return ir;
}

calibrate::CalibrationResult cached_calibration(const PipelineConfig& cfg, const fs::path& dir, bool* from_cache) {
  static std::map<std::string, calibrate::CalibrationResult> memory;
  const std::string key = cfg.calibration_key();
  const fs::path file = dir / ("calibration_" + key + ".json");
  std::lock_guard lock(cache_mutex());
  if (from_cache) *from_cache = true;
  if (auto it = memory.find(key); it != memory.end()) {
    if (!fs::exists(file)) write_text(file, it->second.to_json() + "\n");
    return it->second;
  }
  if (fs::is_regular_file(file)) {
    auto r = calibrate::CalibrationResult::from_json(read_text(file));
    memory.emplace(key, r);
    return r;
  }
  if (from_cache) *from_cache = false;
  ga::GaConfig g = cfg.ga;
  g.sample_rate = cfg.sample_rate;
  auto r = calibrate::calibrate(cfg.calibration, cfg.fdtd, g);
  write_text(file, r.to_json() + "\n");
  memory.emplace(key, r);
  return r;
}

std::vector<ManifestEntry> plan(const PipelineConfig& cfg) {
  cfg.validate();
  const auto db = materials::load_material_db(cfg.material_db);
  std::optional<materials::EmbeddingTable> table;
  if (cfg.embeddings) table = materials::load_embedding_table(*cfg.embeddings);
  const auto ids = scene_ids(cfg.scenes);
  std::vector<ManifestEntry> out;
  for (std::size_t i = 0; i < cfg.scenes.size(); ++i) {
    PreparedScene s = load_scene(cfg.scenes[i], ids[i], cfg, db, table ? &*table : nullptr);
    prepare_geometry(s, cfg);
    if (s.error) {
      ManifestEntry e = entry_skeleton(s, 0);
      e.error = s.error;
      out.push_back(std::move(e));
      continue;
    }
    for (std::size_t p : s.pairs) out.push_back(entry_skeleton(s, p));
  }
  return out;
}

PipelineResult run_pipeline(const PipelineConfig& cfg) {
  cfg.validate();
  const auto db = materials::load_material_db(cfg.material_db);
  std::optional<materials::EmbeddingTable> table;
  if (cfg.embeddings) table = materials::load_embedding_table(*cfg.embeddings);

  std::error_code ec;
  fs::create_directories(cfg.output_dir, ec);
  if (ec) throw Error("cannot create output directory " + cfg.output_dir.string() + ": " + ec.message());

  PipelineResult result;
  result.calibration = cached_calibration(cfg, cfg.output_dir, &result.calibration_from_cache);

  const auto ids = scene_ids(cfg.scenes);
  std::vector<PreparedScene> scenes;
  scenes.reserve(cfg.scenes.size());
  for (std::size_t i = 0; i < cfg.scenes.size(); ++i) {
    PreparedScene s = load_scene(cfg.scenes[i], ids[i], cfg, db, table ? &*table : nullptr);
    prepare_geometry(s, cfg);
    if (!s.error) voxelize_scene(s, cfg);
    if (!s.error) {
      fs::create_directories(cfg.output_dir / s.id, ec);
      if (ec) throw Error("cannot create " + (cfg.output_dir / s.id).string() + ": " + ec.message());
    }
    scenes.push_back(std::move(s));
  }

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const int ga_threads = cfg.ga.threads > 0 ? cfg.ga.threads
                                            : static_cast<int>(std::max(1u, hw / static_cast<unsigned>(cfg.max_parallel)));
  std::vector<std::function<ManifestEntry()>> jobs;
  std::vector<ManifestEntry> skeletons;
  for (const auto& s : scenes) {
    if (s.error) {
      ManifestEntry e = entry_skeleton(s, 0);
      e.error = s.error;
      skeletons.push_back(e);
      jobs.push_back([e] { return e; });
      continue;
    }
    for (std::size_t p : s.pairs) {
      skeletons.push_back(entry_skeleton(s, p));
      jobs.push_back([&s, p, &cfg, &result, ga_threads] { return run_pair(s, p, cfg, result.calibration, ga_threads); });
    }
  }

  auto outcomes = schedule(jobs, cfg.max_parallel);
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (outcomes[i].value) {
      result.manifest.push_back(std::move(*outcomes[i].value));
    } else {
      ManifestEntry e = skeletons[i];
      e.error = outcomes[i].error;
      result.manifest.push_back(std::move(e));
    }
    if (!result.manifest.back().ok()) ++result.failed;
  }
  result.manifest_path = cfg.output_dir / "manifest.json";
  write_text(result.manifest_path, manifest_to_json(result.manifest));
  return result;
}

}  // namespace roomir::pipeline
