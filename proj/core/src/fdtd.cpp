#include "roomir/fdtd.hpp"

#include <algorithm>
#include <map>

#include "roomir/dsp.hpp"

namespace roomir::fdtd {

void FdtdConfig::validate() const {
  if (!(f_max > 0.0)) throw Error("f_max must be positive");
  if (!(points_per_wavelength >= 4.0)) throw Error("points per wavelength must be >= 4");
  if (!(duration > 0.0)) throw Error("duration must be positive");
  if (!(speed_of_sound > 0.0)) throw Error("speed of sound must be positive");
  if (!(courant_fraction > 0.0 && courant_fraction <= 1.0)) throw Error("courant fraction must be in (0, 1]");
  if (output_rate < 0.0) throw Error("output rate must be non-negative");
}

GridParams derive_grid_params(const FdtdConfig& cfg) {
  cfg.validate();
  GridParams g;
  g.dx = cfg.speed_of_sound / (cfg.f_max * cfg.points_per_wavelength);
  g.dt = cfg.courant_fraction * g.dx / (cfg.speed_of_sound * std::sqrt(3.0));
  g.sample_rate = 1.0 / g.dt;
  g.courant = cfg.speed_of_sound * g.dt / g.dx;
  return g;
}

std::vector<double> band_limited_impulse(double cutoff, double fs) {
  if (!(cutoff > 0.0 && cutoff < 0.5 * fs)) throw Error("band-limited impulse cutoff outside (0, fs/2)");
  auto length = static_cast<std::size_t>(std::llround(4.0 * fs / cutoff));
  if (length % 2 == 0) ++length;
  return dsp::windowed_sinc_lowpass(cutoff, fs, length);
}

Simulation::Simulation(const scene::VoxelGrid& grid, const FdtdConfig& cfg)
    : grid_(&grid), params_(derive_grid_params(cfg)) {
  if (std::abs(grid.dx - params_.dx) > 1e-9 * params_.dx) {
    throw Error("voxel spacing " + std::to_string(grid.dx) + " m does not match solver spacing " +
                std::to_string(params_.dx) + " m");
  }
  if (params_.courant * std::sqrt(3.0) > 1.0 + 1e-12) throw Error("unstable time step: courant * sqrt(3) > 1");
  if (grid.admittance.size() != grid.cell_count()) throw Error("voxel grid has no admittance data");
  const double l = params_.courant;
  l2_ = l * l;

  const std::size_t cells = grid.cell_count();
  cell_class_.assign(cells, 0);
  classes_.push_back({});  // class 0: inactive
  std::map<std::pair<int, float>, std::uint16_t> lookup;
  const auto nx = static_cast<std::ptrdiff_t>(grid.dims[0]);
  const auto nxy = nx * grid.dims[1];
  const std::array<std::ptrdiff_t, 6> offsets = {1, -1, nx, -nx, nxy, -nxy};
  for (int k = 1; k + 1 < grid.dims[2]; ++k) {
    for (int j = 1; j + 1 < grid.dims[1]; ++j) {
      for (int i = 1; i + 1 < grid.dims[0]; ++i) {
        const std::size_t idx = grid.index(i, j, k);
        if (!grid.is_air(idx)) continue;
        int air = 0;
        for (auto off : offsets) air += grid.is_air(static_cast<std::size_t>(static_cast<std::ptrdiff_t>(idx) + off));
        const float y = air < 6 ? grid.admittance[idx] : 0.0f;
        if (y < 0.0f) throw Error("negative boundary admittance");
        auto [it, inserted] = lookup.try_emplace({air, y}, static_cast<std::uint16_t>(classes_.size()));
        if (inserted) {
          if (classes_.size() == 0xffff) throw Error("too many distinct boundary classes");
          const double beta = (6 - air) * l * static_cast<double>(y) / 2.0;
          classes_.push_back({2.0 - l2_ * air, 1.0 - beta, 1.0 / (1.0 + beta)});
        }
        cell_class_[idx] = it->second;
      }
    }
  }
  p_.assign(cells, 0.0);
  prev_.assign(cells, 0.0);
}

std::size_t Simulation::air_cell(Vec3 p, const char* what) const {
  const auto c = grid_->cell_of(p);
  if (!c) throw Error(std::string(what) + " lies outside the voxel grid");
  const std::size_t idx = grid_->index((*c)[0], (*c)[1], (*c)[2]);
  if (cell_class_[idx] == 0) throw Error(std::string(what) + " lies in a solid cell");
  return idx;
}

void Simulation::step() {
  const auto& dims = grid_->dims;
  const std::size_t nx = static_cast<std::size_t>(dims[0]);
  const std::size_t nxy = nx * static_cast<std::size_t>(dims[1]);
  const double l2 = l2_;
  const double* p = p_.data();
  double* q = prev_.data();
  const std::uint16_t* cls = cell_class_.data();
  const CellClass* table = classes_.data();
  for (int k = 1; k + 1 < dims[2]; ++k) {
    for (int j = 1; j + 1 < dims[1]; ++j) {
      const std::size_t row = static_cast<std::size_t>(k) * nxy + static_cast<std::size_t>(j) * nx;
      for (std::size_t i = row + 1; i < row + nx - 1; ++i) {
        const std::uint16_t c = cls[i];
        if (c == 0) continue;
        const CellClass& cc = table[c];
        const double lap = p[i - 1] + p[i + 1] + p[i - nx] + p[i + nx] + p[i - nxy] + p[i + nxy];
        q[i] = cc.c * (cc.a * p[i] + l2 * lap - cc.b * q[i]);
      }
    }
  }
  std::swap(p_, prev_);
  ++steps_;
}

double Simulation::energy() const {
  // p_ holds level n+1, prev_ holds level n.
  const auto& dims = grid_->dims;
  const std::size_t nx = static_cast<std::size_t>(dims[0]);
  const std::size_t nxy = nx * static_cast<std::size_t>(dims[1]);
  const std::array<std::size_t, 3> fwd = {1, nx, nxy};
  double kinetic = 0.0;
  double potential = 0.0;
  for (std::size_t i = 0; i < p_.size(); ++i) {
    if (cell_class_[i] == 0) continue;
    const double d = p_[i] - prev_[i];
    kinetic += d * d;
    for (auto off : fwd) {
      const std::size_t j = i + off;
      if (j >= p_.size() || cell_class_[j] == 0) continue;
      potential += (p_[i] - p_[j]) * (prev_[i] - prev_[j]);
    }
  }
  return 0.5 * (kinetic + l2_ * potential);
}

double Simulation::max_abs_pressure() const {
  double m = 0.0;
  for (double v : p_) m = std::max(m, std::abs(v));
  return m;
}

void Simulation::check_finite() const {
  for (std::size_t i = 0; i < p_.size(); ++i) {
    if (!std::isfinite(p_[i])) {
      throw Error("non-finite pressure at step " + std::to_string(steps_) + " in cell " + std::to_string(i));
    }
  }
}

std::vector<ImpulseResponse> run(const scene::VoxelGrid& grid, Vec3 source, std::span<const Vec3> receivers,
                                 std::span<const double> source_signal, const FdtdConfig& cfg) {
  Simulation sim(grid, cfg);
  const std::size_t src = sim.air_cell(source, "source");
  std::vector<std::size_t> rec;
  rec.reserve(receivers.size());
  for (const Vec3& r : receivers) rec.push_back(sim.air_cell(r, "receiver"));

  const double fs = sim.params().sample_rate;
  const auto steps = static_cast<std::size_t>(std::ceil(cfg.duration * fs));
  std::vector<std::vector<double>> out(rec.size(), std::vector<double>(steps, 0.0));
  for (std::size_t n = 0; n < steps; ++n) {
    if (n < source_signal.size()) sim.add_pressure(src, source_signal[n]);
    for (std::size_t r = 0; r < rec.size(); ++r) {
      const double v = sim.pressure(rec[r]);
      if (!std::isfinite(v)) throw Error("non-finite pressure at step " + std::to_string(n));
      out[r][n] = v;
    }
    sim.step();
    if ((n & 255) == 255) sim.check_finite();
  }

  std::vector<ImpulseResponse> irs;
  irs.reserve(rec.size());
  for (auto& samples : out) {
    ImpulseResponse ir;
    ir.origin = IrOrigin::fdtd;
    if (cfg.output_rate > 0.0 && std::abs(cfg.output_rate - fs) > 1e-9) {
      ir.samples = dsp::resample(samples, fs, cfg.output_rate);
      ir.sample_rate = cfg.output_rate;
    } else {
      ir.samples = std::move(samples);
      ir.sample_rate = fs;
    }
    irs.push_back(std::move(ir));
  }
  return irs;
}

}  // namespace roomir::fdtd
