#pragma once

#include <span>
#include <string>
#include <vector>

#include "roomir/fdtd.hpp"
#include "roomir/ga.hpp"

namespace roomir::calibrate {

struct CalibrationSetup {
  double distance = 1.0;
  int receiver_count = 90;
  double arc_degrees = 90.0;
  double cutoff = 255.0;
  /// Recordings are cut at onset + truncation_factor * r / c.
  double truncation_factor = 2.0;
  /// Air margin around source and receivers; 0 sizes it so that shell reflections
  /// arrive after the truncation window.
  double margin = 0.0;

  void validate() const;
};

/// Result of the energy matching for one engine.
struct EngineCalibration {
  double eta = 0.0;
  double source_energy = 0.0;                 // E_s
  std::vector<double> receiver_energy;        // E_r per receiver
  std::vector<double> receiver_distance;      // distance actually used per receiver
  std::vector<double> error_db;               // 20 log10(eta sqrt(E_r) / sqrt(E_s)), signed
  double mean_error_db = 0.0;                 // mean of |error_db|
  double max_error_db = 0.0;                  // max of |error_db|
};

/// Energy matching on given recordings: each recording is truncated to its window
/// length, eta = mean_i sqrt(E_s / E_r,i).
EngineCalibration calibrate_recordings(std::span<const double> source, const std::vector<std::vector<double>>& recordings,
                                       std::span<const std::size_t> windows);

/// Receiver positions on the arc in the xy-plane through `center`.
std::vector<Vec3> arc_receivers(const CalibrationSetup& setup, Vec3 center);

struct FdtdCalibrationRun {
  EngineCalibration calibration;
  std::vector<double> source_signal;
  std::vector<std::vector<double>> recordings;  // raw, internal rate
  std::vector<std::size_t> windows;
  double sample_rate = 0.0;
};

/// Free-field FDTD run with the band-limited impulse and admittance-1 domain shell.
FdtdCalibrationRun run_fdtd_calibration(const CalibrationSetup& setup, const fdtd::FdtdConfig& cfg);
EngineCalibration calibrate_fdtd(const CalibrationSetup& setup, const fdtd::FdtdConfig& cfg);

/// Uses the deterministic direct term of the GA engine, so it does not depend on ray count.
EngineCalibration calibrate_ga(const CalibrationSetup& setup, const ga::GaConfig& cfg);

double combined_eta(double eta_w, double eta_g);

struct CalibrationResult {
  double eta_w = 0.0;
  double eta_g = 0.0;
  double eta_combined = 0.0;
  std::vector<double> per_receiver_error_db;
  double mean_error_db = 0.0;
  double max_error_db = 0.0;
  double source_energy = 0.0;
  std::vector<double> receiver_energy;

  std::string to_json() const;
  static CalibrationResult from_json(const std::string& text);
};

CalibrationResult calibrate(const CalibrationSetup& setup, const fdtd::FdtdConfig& fdtd_cfg, const ga::GaConfig& ga_cfg);

}  // namespace roomir::calibrate
