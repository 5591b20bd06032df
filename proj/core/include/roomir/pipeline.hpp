#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "roomir/calibrate.hpp"
#include "roomir/fdtd.hpp"
#include "roomir/ga.hpp"
#include "roomir/hybrid.hpp"
#include "roomir/materials.hpp"

namespace roomir::pipeline {

struct PipelineConfig {
  std::vector<std::filesystem::path> scenes;
  std::filesystem::path material_db;
  std::optional<std::filesystem::path> embeddings;
  std::filesystem::path output_dir = "roomir_out";
  double sample_rate = 48000.0;
  ga::GaConfig ga;
  fdtd::FdtdConfig fdtd;
  hybrid::CrossoverSpec crossover;
  calibrate::CalibrationSetup calibration;
  materials::ScatteringPrior scattering_prior = materials::default_scattering_prior();
  double grid_spacing = 1.0;
  double clearance = 0.2;
  std::uint64_t rng_seed = 0;
  int max_parallel = 1;
  int pair_cap = 8;

  /// Checks value ranges and that every referenced file exists.
  void validate() const;

  /// Parses a JSON config. Relative paths resolve against `base_dir`. The optional
  /// "profile" key selects "full" (default) or "desk" (f_max = crossover = 350 Hz)
  /// before explicit values are applied.
  static PipelineConfig from_json(const std::string& text, const std::filesystem::path& base_dir = {});
  static PipelineConfig load(const std::filesystem::path& path);
  std::string to_json() const;

  /// Hex content hash of everything the calibration depends on.
  std::string calibration_key() const;
};

/// Applies ROOMIR_OUTPUT_DIR and ROOMIR_JOBS from the environment when set.
void apply_env_overrides(PipelineConfig& cfg);

struct MaterialChoice {
  std::string label;
  std::string material;
  std::uint64_t seed = 0;
  double probability = 0.0;
};

struct ManifestEntry {
  std::string scene_id;
  std::size_t pair_index = 0;
  Vec3 source;
  Vec3 receiver;
  double distance = 0.0;
  /// Output files relative to the output directory; empty for failed entries.
  std::string ga_wav;
  std::string fdtd_wav;
  std::string hybrid_wav;
  std::vector<MaterialChoice> materials;
  double scene_volume = 0.0;
  double rt60 = 0.0;
  bool rt60_fit_failed = false;
  double eta_w = 0.0;
  double eta_g = 0.0;
  double eta_combined = 0.0;
  /// Gain that would bring the hybrid peak to 1; recorded but not applied.
  double peak_gain = 0.0;
  std::optional<std::string> error;

  bool ok() const { return !error.has_value(); }
};

std::string manifest_to_json(const std::vector<ManifestEntry>& entries);
std::vector<ManifestEntry> manifest_from_json(const std::string& text);
std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path);

/// Result slot of one scheduled job.
template <typename R>
struct JobOutcome {
  std::optional<R> value;
  std::string error;
};

/// Runs every job with at most `max_parallel` concurrent workers. Outcomes are stored
/// by job index, so the result does not depend on the degree of parallelism.
/// Exceptions thrown by a job become its error string.
template <typename R>
std::vector<JobOutcome<R>> schedule(const std::vector<std::function<R()>>& jobs, int max_parallel) {
  if (max_parallel < 1) throw Error("max_parallel must be >= 1");
  std::vector<JobOutcome<R>> out(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        out[i].value.emplace(jobs[i]());
      } catch (const std::exception& e) {
        out[i].error = e.what();
      } catch (...) {
        out[i].error = "unknown error";
      }
    }
  };
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(max_parallel), jobs.size());
  if (workers <= 1) {
    worker();
    return out;
  }
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  pool.clear();
  return out;
}

struct PipelineResult {
  std::vector<ManifestEntry> manifest;
  calibrate::CalibrationResult calibration;
  bool calibration_from_cache = false;
  std::filesystem::path manifest_path;
  std::size_t failed = 0;
};

/// FDTD response to a unit impulse at `source`, resampled to `sample_rate`. The
/// samples are scaled by fs_internal / sample_rate so that the result stays the impulse
/// response of the same continuous system and the calibration factors carry over.
ImpulseResponse fdtd_impulse_response(const scene::VoxelGrid& grid, Vec3 source, Vec3 receiver,
                                      const fdtd::FdtdConfig& cfg, double sample_rate);

/// Loads and checks every scene and lists the planned (scene, pair) jobs without simulating.
std::vector<ManifestEntry> plan(const PipelineConfig& cfg);

/// Full generation run; writes WAVs, the calibration JSON and manifest.json into cfg.output_dir.
/// Per-pair failures are recorded in the manifest; configuration and IO errors throw.
PipelineResult run_pipeline(const PipelineConfig& cfg);

/// Returns the cached calibration for cfg when present in `dir`, computing and storing it otherwise.
calibrate::CalibrationResult cached_calibration(const PipelineConfig& cfg, const std::filesystem::path& dir,
                                                bool* from_cache = nullptr);

}  // namespace roomir::pipeline
