#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "roomir/common.hpp"
#include "roomir/scene.hpp"
#include "roomir/signal.hpp"

namespace roomir::fdtd {

struct FdtdConfig {
  double f_max = 1400.0;
  double points_per_wavelength = 10.5;
  double duration = 1.5;
  double speed_of_sound = kDefaultSpeedOfSound;
  double courant_fraction = 0.99;
  /// Rate of the returned IRs; 0 keeps the internal rate 1/dt.
  double output_rate = 0.0;

  void validate() const;
};

struct GridParams {
  double dx = 0.0;
  double dt = 0.0;
  double sample_rate = 0.0;  // 1 / dt
  double courant = 0.0;      // c dt / dx
};

/// dx = c / (f_max PPW), dt = courant_fraction dx / (c sqrt 3).
GridParams derive_grid_params(const FdtdConfig& cfg);

/// Calibration source: unit impulse through a Blackman-windowed sinc low-pass of
/// length 4 fs / cutoff (odd); the coefficients are the signal.
std::vector<double> band_limited_impulse(double cutoff, double fs);

/// Leapfrog 7-point scheme on a voxel grid. Air cells with K air neighbours and
/// boundary admittance Y update as
///   (1 + b) p' = (2 - l^2 K) p + l^2 sum(p_nb) - (1 - b) p_prev,   b = (6 - K) l Y / 2,
/// the ghost-cell elimination of a locally reacting wall on each missing neighbour.
class Simulation {
 public:
  Simulation(const scene::VoxelGrid& grid, const FdtdConfig& cfg);

  const GridParams& params() const { return params_; }
  const scene::VoxelGrid& grid() const { return *grid_; }

  /// Flat index of the air cell containing p; throws when p is outside or in a solid cell.
  std::size_t air_cell(Vec3 p, const char* what) const;

  void add_pressure(std::size_t cell, double value) { p_[cell] += value; }
  double pressure(std::size_t cell) const { return p_[cell]; }
  /// Advances one time step.
  void step();
  std::size_t steps_done() const { return steps_; }

  /// Discrete energy between the last two time levels; constant in rigid domains
  /// and non-increasing with absorbing boundaries once sources are off.
  double energy() const;
  double max_abs_pressure() const;
  /// Throws when any value is non-finite.
  void check_finite() const;

 private:
  struct CellClass {
    double a = 0.0;  // coefficient on p
    double b = 0.0;  // coefficient on p_prev
    double c = 0.0;  // 1 / (1 + beta)
  };

  const scene::VoxelGrid* grid_;
  GridParams params_;
  double l2_ = 0.0;
  std::vector<CellClass> classes_;
  std::vector<std::uint16_t> cell_class_;
  std::vector<double> p_;
  std::vector<double> prev_;
  std::size_t steps_ = 0;
};

/// Soft-source simulation: source_signal[n] is added at the source cell at step n and
/// each receiver cell is recorded at every step. Output is resampled to cfg.output_rate.
std::vector<ImpulseResponse> run(const scene::VoxelGrid& grid, Vec3 source, std::span<const Vec3> receivers,
                                 std::span<const double> source_signal, const FdtdConfig& cfg);

}  // namespace roomir::fdtd
