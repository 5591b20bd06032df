#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "roomir/common.hpp"
#include "roomir/dsp.hpp"
#include "roomir/scene.hpp"
#include "roomir/signal.hpp"

namespace roomir::ga {

struct GaConfig {
  int ray_count = 20000;
  int max_depth = 200;
  /// Rays stop once their summed band energy falls below this fraction of the start value.
  double energy_floor = 1e-6;
  double sample_rate = 48000.0;
  double duration = 1.5;
  double speed_of_sound = kDefaultSpeedOfSound;
  std::uint64_t rng_seed = 0;
  double receiver_radius = 0.1;
  double bin_width = 1e-3;
  /// Worker threads for tracing; 0 picks std::thread::hardware_concurrency().
  int threads = 0;

  void validate() const;
};

/// Acoustic surface data referenced by TriangleMesh::triangle_material.
struct Surface {
  BandSpectrum absorption{};
  BandSpectrum scattering{};
};

struct EnergyHistogram {
  double bin_width = 0.0;
  /// Reflected energy per time bin and band (fluence, i.e. energy per unit area).
  std::vector<BandSpectrum> bins;
  /// Deterministic line-of-sight term; zero when the direct path is occluded.
  double direct_time = 0.0;
  BandSpectrum direct_energy{};
  /// Ray energy bookkeeping, per band, summed over all rays (emitted = 1).
  BandSpectrum absorbed{};
  BandSpectrum escaped{};
  BandSpectrum residual{};

  bool open_mesh() const;
  BandSpectrum band_totals() const;
};

/// Stochastic ray tracing from `source` with a spherical receiver at `receiver`.
/// Results do not depend on the number of threads.
EnergyHistogram trace(const scene::TriangleMesh& mesh, std::span<const Surface> surfaces, Vec3 source,
                      Vec3 receiver, const GaConfig& cfg);

/// Cutoff of the broadband direct-sound pulse.
double direct_pulse_cutoff(double sample_rate);

/// Broadband pulse at `time` whose energy equals the sum of `band_energy`.
dsp::Pulse direct_pulse(const BandSpectrum& band_energy, double time, double sample_rate);

/// Noise-shaped pressure synthesis: octave-filtered noise under the per-bin energy
/// envelope, plus the direct term as a band-limited pulse.
ImpulseResponse synthesize_ir(const EnergyHistogram& hist, const GaConfig& cfg, std::uint64_t seed);

/// Octave band-pass used by synthesis: 4th-order Butterworth edges at center/sqrt2, center*sqrt2.
dsp::Sos octave_bandpass(int band, double sample_rate);

/// Sabine estimate 0.161 V / sum(S_j alpha_j) for one band. Throws on open meshes.
double sabine_rt60(const scene::TriangleMesh& mesh, std::span<const Surface> surfaces, int band);
/// Eyring estimate 0.161 V / (-S ln(1 - mean alpha)) for one band.
double eyring_rt60(const scene::TriangleMesh& mesh, std::span<const Surface> surfaces, int band);

}  // namespace roomir::ga
