#include "roomir/calibrate.hpp"

#include <algorithm>
#include <numeric>

#include <json.hpp>

#include "roomir/dsp.hpp"

namespace roomir::calibrate {

void CalibrationSetup::validate() const {
  if (!(distance > 0.0)) throw Error("calibration distance must be positive");
  if (receiver_count < 1) throw Error("calibration needs at least one receiver");
  if (!(arc_degrees > 0.0 && arc_degrees <= 180.0)) throw Error("calibration arc must be in (0, 180] degrees");
  if (!(cutoff > 0.0)) throw Error("calibration cutoff must be positive");
  if (!(truncation_factor > 0.0)) throw Error("truncation factor must be positive");
  if (margin < 0.0) throw Error("calibration margin must be non-negative");
}

EngineCalibration calibrate_recordings(std::span<const double> source, const std::vector<std::vector<double>>& recordings,
                                       std::span<const std::size_t> windows) {
  if (recordings.empty()) throw Error("calibration needs at least one recording");
  if (windows.size() != recordings.size()) throw Error("one truncation window per recording required");
  EngineCalibration cal;
  cal.source_energy = dsp::energy(source);
  if (!(cal.source_energy > 0.0)) throw Error("calibration source has no energy");
  std::vector<double> etas;
  for (std::size_t i = 0; i < recordings.size(); ++i) {
    const std::size_t n = std::min(windows[i], recordings[i].size());
    if (n == 0) throw Error("calibration truncation window is empty");
    const double er = dsp::energy(std::span<const double>(recordings[i]).first(n));
    if (!(er > 0.0)) throw Error("calibration receiver " + std::to_string(i) + " recorded no energy");
    cal.receiver_energy.push_back(er);
    etas.push_back(std::sqrt(cal.source_energy / er));
  }
  cal.eta = std::accumulate(etas.begin(), etas.end(), 0.0) / static_cast<double>(etas.size());
  double sum_abs = 0.0;
  for (std::size_t i = 0; i < etas.size(); ++i) {
    const double err = 20.0 * std::log10(cal.eta * std::sqrt(cal.receiver_energy[i]) / std::sqrt(cal.source_energy));
    cal.error_db.push_back(err);
    sum_abs += std::abs(err);
    cal.max_error_db = std::max(cal.max_error_db, std::abs(err));
  }
  cal.mean_error_db = sum_abs / static_cast<double>(etas.size());
  return cal;
}

std::vector<Vec3> arc_receivers(const CalibrationSetup& setup, Vec3 center) {
  std::vector<Vec3> out;
  const double arc = setup.arc_degrees * kPi / 180.0;
  for (int i = 0; i < setup.receiver_count; ++i) {
    const double theta = setup.receiver_count == 1 ? 0.0 : arc * i / (setup.receiver_count - 1);
    out.push_back(center + Vec3{std::cos(theta), std::sin(theta), 0.0} * setup.distance);
  }
  return out;
}

FdtdCalibrationRun run_fdtd_calibration(const CalibrationSetup& setup, const fdtd::FdtdConfig& cfg) {
  setup.validate();
  const fdtd::GridParams gp = fdtd::derive_grid_params(cfg);
  const double fs = gp.sample_rate;
  const double c = cfg.speed_of_sound;

  FdtdCalibrationRun out;
  out.sample_rate = fs;
  out.source_signal = fdtd::band_limited_impulse(setup.cutoff, fs);
  const double onset = 0.5 * static_cast<double>(out.source_signal.size() - 1);  // linear-phase delay

  // Source sits on the centre of cell `pad` in every axis of an open domain.
  const double margin = setup.margin > 0.0 ? setup.margin : c * onset / fs + setup.distance + 2.0 * gp.dx;
  const int pad = static_cast<int>(std::ceil(margin / gp.dx)) + 1;
  const int span = static_cast<int>(std::ceil(setup.distance / gp.dx)) + 1;
  const std::array<int, 3> dims = {2 * pad + span + 1, 2 * pad + span + 1, 2 * pad + 1};
  const Vec3 origin{-(pad + 0.5) * gp.dx, -(pad + 0.5) * gp.dx, -(pad + 0.5) * gp.dx};
  const scene::VoxelGrid grid = scene::VoxelGrid::open_domain(origin, gp.dx, dims, 1.0);

  const Vec3 source{0.0, 0.0, 0.0};
  const auto receivers = arc_receivers(setup, source);
  double max_window = 0.0;
  for (const Vec3& r : receivers) {
    const auto cell = grid.cell_of(r);
    if (!cell) throw Error("calibration receiver outside the domain");
    const double snapped = distance(source, grid.cell_center((*cell)[0], (*cell)[1], (*cell)[2]));
    const auto window = static_cast<std::size_t>(std::ceil(onset + setup.truncation_factor * snapped / c * fs));
    out.windows.push_back(window);
    max_window = std::max(max_window, static_cast<double>(window));
  }

  fdtd::FdtdConfig run_cfg = cfg;
  run_cfg.output_rate = 0.0;
  run_cfg.duration = (max_window + 1.0) / fs;
  auto irs = fdtd::run(grid, source, receivers, out.source_signal, run_cfg);
  for (auto& ir : irs) out.recordings.push_back(std::move(ir.samples));
  out.calibration = calibrate_recordings(out.source_signal, out.recordings, out.windows);
  for (const Vec3& r : receivers) {
    const auto cell = *grid.cell_of(r);
    out.calibration.receiver_distance.push_back(distance(source, grid.cell_center(cell[0], cell[1], cell[2])));
  }
  return out;
}

EngineCalibration calibrate_fdtd(const CalibrationSetup& setup, const fdtd::FdtdConfig& cfg) {
  return run_fdtd_calibration(setup, cfg).calibration;
}

EngineCalibration calibrate_ga(const CalibrationSetup& setup, const ga::GaConfig& cfg) {
  setup.validate();
  cfg.validate();
  const double fs = cfg.sample_rate;
  const double c = cfg.speed_of_sound;
  const auto source = fdtd::band_limited_impulse(setup.cutoff, fs);
  const double onset = 0.5 * static_cast<double>(source.size() - 1);

  std::vector<std::vector<double>> recordings;
  std::vector<std::size_t> windows;
  std::vector<double> distances;
  for (const Vec3& r : arc_receivers(setup, Vec3{})) {
    const double d = norm(r);
    BandSpectrum direct;
    direct.fill(1.0 / (4.0 * kPi * d * d));
    const dsp::Pulse pulse = ga::direct_pulse(direct, d / c, fs);
    if (pulse.first < 0) throw Error("ga calibration: direct pulse starts before t = 0");
    std::vector<double> ir(static_cast<std::size_t>(pulse.first) + pulse.taps.size(), 0.0);
    std::copy(pulse.taps.begin(), pulse.taps.end(), ir.begin() + pulse.first);
    recordings.push_back(dsp::fft_convolve(ir, source));
    windows.push_back(static_cast<std::size_t>(std::ceil(onset + setup.truncation_factor * d / c * fs)));
    distances.push_back(d);
  }
  EngineCalibration cal = calibrate_recordings(source, recordings, windows);
  cal.receiver_distance = std::move(distances);
  return cal;
}

double combined_eta(double eta_w, double eta_g) {
  if (!(eta_w > 0.0) || !(eta_g > 0.0)) throw Error("calibration factors must be positive");
  return eta_w / eta_g;
}

std::string CalibrationResult::to_json() const {
  nlohmann::json j;
  j["eta_w"] = eta_w;
  j["eta_g"] = eta_g;
  j["eta_combined"] = eta_combined;
  j["per_receiver_error_db"] = per_receiver_error_db;
  j["mean_error_db"] = mean_error_db;
  j["max_error_db"] = max_error_db;
  j["E_s"] = source_energy;
  j["E_r"] = receiver_energy;
  return j.dump(2);
}

CalibrationResult CalibrationResult::from_json(const std::string& text) {
  CalibrationResult r;
  try {
    const auto j = nlohmann::json::parse(text);
    r.eta_w = j.at("eta_w").get<double>();
    r.eta_g = j.at("eta_g").get<double>();
    r.eta_combined = j.at("eta_combined").get<double>();
    r.per_receiver_error_db = j.at("per_receiver_error_db").get<std::vector<double>>();
    r.mean_error_db = j.at("mean_error_db").get<double>();
    r.max_error_db = j.at("max_error_db").get<double>();
    r.source_energy = j.at("E_s").get<double>();
    r.receiver_energy = j.at("E_r").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("calibration json: ") + e.what());
  }
  return r;
}

CalibrationResult calibrate(const CalibrationSetup& setup, const fdtd::FdtdConfig& fdtd_cfg, const ga::GaConfig& ga_cfg) {
  const EngineCalibration w = calibrate_fdtd(setup, fdtd_cfg);
  const EngineCalibration g = calibrate_ga(setup, ga_cfg);
  CalibrationResult r;
  r.eta_w = w.eta;
  r.eta_g = g.eta;
  r.eta_combined = combined_eta(w.eta, g.eta);
  r.per_receiver_error_db = w.error_db;
  r.mean_error_db = w.mean_error_db;
  r.max_error_db = w.max_error_db;
  r.source_energy = w.source_energy;
  r.receiver_energy = w.receiver_energy;
  return r;
}

}  // namespace roomir::calibrate
