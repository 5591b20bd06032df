#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "roomir/common.hpp"

namespace roomir::materials {

struct MaterialRecord {
  std::string name;
  BandSpectrum absorption{};
  std::optional<BandSpectrum> scattering;
};

/// CSV: name,a63,...,a8000[,s63,...,s8000]. Rows are numbered from 1 (the header).
std::vector<MaterialRecord> parse_material_db(std::istream& in);
std::vector<MaterialRecord> load_material_db(const std::filesystem::path& path);

inline constexpr std::size_t kEmbeddingDim = 512;
using Embedding = std::vector<double>;

struct EmbeddingTable {
  std::size_t dimension = kEmbeddingDim;
  std::map<std::string, Embedding> entries;

  const Embedding* find(const std::string& name) const {
    auto it = entries.find(name);
    return it == entries.end() ? nullptr : &it->second;
  }
  void validate() const;
};

/// JSON: {"dimension": D, "entries": {"name": [floats...]}}.
EmbeddingTable parse_embedding_table(std::string_view json_text);
EmbeddingTable load_embedding_table(const std::filesystem::path& path);

/// Deterministic trigram-hashing embedder used when no table is supplied.
Embedding fallback_embed(std::string_view text, std::size_t dimension = kEmbeddingDim);

/// Cosine similarity on a 1e-12 grid; zero when either vector has zero norm.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

struct AssignmentDistribution {
  std::vector<double> weights;
  std::vector<double> probabilities;
  std::optional<std::size_t> chosen;
};

/// Truncated-cosine weights w_i = max(0, cos(label, material_i)), normalized to
/// probabilities. All-zero weights fall back to the uniform distribution.
AssignmentDistribution distribution_from_embeddings(std::span<const double> label,
                                                    const std::vector<Embedding>& materials);

/// Looks up label and material names in `table`; when the table is absent or any name is
/// missing, every vector comes from fallback_embed instead.
AssignmentDistribution assignment_distribution(const std::string& label,
                                               const std::vector<MaterialRecord>& materials,
                                               const EmbeddingTable* table);

/// Inverse-CDF draw from a seeded generator.
std::size_t sample_assignment(const AssignmentDistribution& dist, std::uint64_t seed);

struct ScatteringPrior {
  BandSpectrum mean{};
  BandSpectrum stddev{};
};

/// Upper bound applied to the 63-250 Hz scattering bands.
inline constexpr double kLowBandScatteringCap = 0.05;
inline constexpr int kLowScatteringBands = 3;

ScatteringPrior default_scattering_prior();
BandSpectrum sample_scattering(const ScatteringPrior& prior, std::uint64_t seed);

/// Acoustic properties bound to one surface group of a scene.
struct SurfaceMaterial {
  std::string label;
  std::string material;
  std::size_t material_index = 0;
  std::uint64_t seed = 0;
  double probability = 0.0;
  BandSpectrum absorption{};
  BandSpectrum scattering{};
};

/// Runs the semantic assignment for each label with a per-label seed derived from
/// `seed`; scattering comes from the database when present, else from `prior`.
std::vector<SurfaceMaterial> assign_labels(const std::vector<std::string>& labels,
                                           const std::vector<MaterialRecord>& db, const EmbeddingTable* table,
                                           const ScatteringPrior& prior, std::uint64_t seed);

}  // namespace roomir::materials
