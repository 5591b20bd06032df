#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "roomir/common.hpp"
#include "roomir/signal.hpp"

namespace roomir::analysis {

struct DecayCurve {
  std::vector<double> edc_db;
  double rt60 = 0.0;
  std::pair<double, double> fit_range_db{-5.0, -25.0};
  bool fit_failed = false;
  double slope_db_per_s = 0.0;
};

/// Schroeder backward integration of an energy sequence sampled every `dt` seconds,
/// with a least-squares T20 fit scaled to 60 dB.
DecayCurve edc_from_energy(std::span<const double> energy, double dt, double fit_start_db = -5.0,
                           double fit_end_db = -25.0);
DecayCurve schroeder_edc(const ImpulseResponse& ir, double fit_start_db = -5.0, double fit_end_db = -25.0);

/// Nominal base-2 third-octave centres 1000 * 2^(k/3) within [f_lo, f_hi].
std::vector<double> third_octave_centers(double f_lo, double f_hi);

struct BandLevels {
  std::vector<double> centers;
  /// Signal energy falling in each band (one-sided, sums to the total under Parseval).
  std::vector<double> energy;
  /// Mean power spectral density over the band in dB; flat for a unit impulse.
  std::vector<double> level_db;
};

/// Energy and level for bands given by explicit edges (edges.size() = bands + 1).
BandLevels band_energies(const ImpulseResponse& ir, std::span<const double> edges);
/// Third-octave bands [c 2^(-1/6), c 2^(1/6)) around each centre.
BandLevels band_response(const ImpulseResponse& ir, std::span<const double> centers);

struct LabeledIr {
  std::string label;
  ImpulseResponse ir;
};

struct ComparisonReport {
  std::vector<std::string> labels;
  std::vector<double> centers;
  std::vector<std::vector<double>> level_db;  // [ir][band]
  struct PairDiff {
    std::size_t a = 0;
    std::size_t b = 0;
    double mean_abs_db = 0.0;
  };
  std::vector<PairDiff> pairs;
  double band_lo = 0.0;
  double band_hi = 0.0;

  double difference(std::size_t a, std::size_t b) const;
  std::string levels_csv() const;
  std::string pairs_csv() const;
};

/// Third-octave levels for each IR and the pairwise mean absolute level difference over
/// bands whose centre lies in [band_lo, band_hi].
ComparisonReport compare_report(const std::vector<LabeledIr>& irs, double band_lo = 50.0, double band_hi = 8000.0);

struct AugmentResult {
  std::vector<double> signal;
  std::size_t offset = 0;
  double noise_gain = 0.0;
};

/// Reverberant speech x_c * r plus noise taken from offset l (wrapping cyclically) and
/// scaled to `snr_db` against the reverberant signal. An all-zero noise adds nothing.
/// When `offset` is empty it is drawn uniformly from the valid range with `seed`.
AugmentResult augment_speech(std::span<const double> clean, std::span<const double> ir, std::span<const double> noise,
                             std::optional<std::size_t> offset, double snr_db = 20.0, std::uint64_t seed = 0);

/// O(N M) direct-sum convolution.
std::vector<double> direct_convolve(std::span<const double> a, std::span<const double> b);

struct StatsRecord {
  std::string scene_id;
  Vec3 source;
  Vec3 receiver;
  double scene_volume = 0.0;
  double rt60 = 0.0;
};

struct DatasetStats {
  double bin_width = 0.0;
  std::vector<double> distances;
  std::vector<double> bin_lower;
  std::vector<std::size_t> bin_count;
  std::vector<std::pair<double, double>> volume_rt60;

  std::string distance_csv() const;
  std::string volume_rt60_csv() const;
  std::string distance_svg() const;
};

DatasetStats dataset_stats(std::span<const StatsRecord> records, double bin_width = 0.5);

}  // namespace roomir::analysis
