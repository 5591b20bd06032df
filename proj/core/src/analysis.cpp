#include "roomir/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "roomir/dsp.hpp"

namespace roomir::analysis {

namespace {

constexpr double kFloorDb = -400.0;
// EDC values are stored on a 1e-6 dB grid, which makes the fit independent of the
// last-bit rounding differences introduced by rescaling an IR.
constexpr double kEdcResolutionDb = 1e-6;

double to_db(double ratio) { return ratio > 0.0 ? std::max(10.0 * std::log10(ratio), kFloorDb) : kFloorDb; }

}  // namespace

DecayCurve edc_from_energy(std::span<const double> energy, double dt, double fit_start_db, double fit_end_db) {
  if (energy.empty()) throw Error("decay curve of an empty signal");
  if (!(dt > 0.0)) throw Error("decay curve sample interval must be positive");
  if (!(fit_end_db < fit_start_db && fit_start_db <= 0.0)) throw Error("decay fit range must satisfy end < start <= 0 dB");

  DecayCurve out;
  out.fit_range_db = {fit_start_db, fit_end_db};
  std::vector<long double> tail(energy.size());
  long double acc = 0.0L;
  for (std::size_t i = energy.size(); i-- > 0;) {
    if (energy[i] < 0.0 || !std::isfinite(energy[i])) throw Error("decay curve input must be finite and non-negative");
    acc += energy[i];
    tail[i] = acc;
  }
  out.edc_db.resize(energy.size());
  if (!(acc > 0.0)) {
    std::fill(out.edc_db.begin(), out.edc_db.end(), kFloorDb);
    out.edc_db[0] = 0.0;
    out.fit_failed = true;
    return out;
  }
  for (std::size_t i = 0; i < tail.size(); ++i) {
    const double db = to_db(static_cast<double>(tail[i] / acc));
    out.edc_db[i] = std::round(db / kEdcResolutionDb) * kEdcResolutionDb;
  }

  // Fit from the first crossing of fit_start down to the first crossing of fit_end.
  const auto begin = std::find_if(out.edc_db.begin(), out.edc_db.end(), [&](double v) { return v <= fit_start_db; });
  const auto end = std::find_if(begin, out.edc_db.end(), [&](double v) { return v < fit_end_db; });
  if (end == out.edc_db.end() || std::distance(begin, end) < 2) {
    out.fit_failed = true;
    return out;
  }
  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  const auto first = static_cast<std::size_t>(begin - out.edc_db.begin());
  const auto last = static_cast<std::size_t>(end - out.edc_db.begin());
  const auto n = static_cast<double>(last - first);
  for (std::size_t i = first; i < last; ++i) {
    const double t = static_cast<double>(i) * dt;
    st += t;
    sy += out.edc_db[i];
    stt += t * t;
    sty += t * out.edc_db[i];
  }
  const double denom = n * stt - st * st;
  const double slope = denom > 0.0 ? (n * sty - st * sy) / denom : 0.0;
  if (!(slope < 0.0)) {
    out.fit_failed = true;
    return out;
  }
  out.slope_db_per_s = slope;
  out.rt60 = -60.0 / slope;
  return out;
}

DecayCurve schroeder_edc(const ImpulseResponse& ir, double fit_start_db, double fit_end_db) {
  ir.validate();
  std::vector<double> e(ir.samples.size());
  std::transform(ir.samples.begin(), ir.samples.end(), e.begin(), [](double v) { return v * v; });
  return edc_from_energy(e, 1.0 / ir.sample_rate, fit_start_db, fit_end_db);
}

std::vector<double> third_octave_centers(double f_lo, double f_hi) {
  std::vector<double> out;
  for (int k = -30; k <= 14; ++k) {
    const double f = 1000.0 * std::exp2(k / 3.0);
    if (f >= f_lo * (1.0 - 1e-9) && f <= f_hi * (1.0 + 1e-9)) out.push_back(f);
  }
  return out;
}

BandLevels band_energies(const ImpulseResponse& ir, std::span<const double> edges) {
  ir.validate();
  if (ir.samples.empty()) throw Error("band analysis of an empty impulse response");
  if (edges.size() < 2) throw Error("band analysis needs at least one band");
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (!(edges[i] > edges[i - 1])) throw Error("band edges must be increasing");
  }
  const double fs = ir.sample_rate;
  const std::size_t n = dsp::next_pow2(std::max(ir.samples.size(), static_cast<std::size_t>(std::ceil(fs))));
  const auto spec = dsp::rfft(ir.samples, n);
  const double df = fs / static_cast<double>(n);

  BandLevels out;
  const std::size_t bands = edges.size() - 1;
  out.energy.assign(bands, 0.0);
  out.level_db.assign(bands, kFloorDb);
  for (std::size_t b = 0; b < bands; ++b) {
    out.centers.push_back(std::sqrt(edges[b] * edges[b + 1]));
    const auto k0 = static_cast<std::size_t>(std::ceil(edges[b] / df));
    const auto k1 = std::min(spec.size(), static_cast<std::size_t>(std::ceil(edges[b + 1] / df)));
    double psd = 0.0;
    std::size_t count = 0;
    for (std::size_t k = k0; k < k1; ++k) {
      const double p = std::norm(spec[k]);
      const double weight = (k == 0 || (k == n / 2)) ? 1.0 : 2.0;
      out.energy[b] += weight * p / static_cast<double>(n);
      psd += p;
      ++count;
    }
    if (count == 0) {
      // Band narrower than one bin: take the bin nearest the centre.
      const auto k = std::min(spec.size() - 1, static_cast<std::size_t>(std::llround(out.centers[b] / df)));
      psd = std::norm(spec[k]);
      count = 1;
    }
    out.level_db[b] = to_db(psd / static_cast<double>(count));
  }
  return out;
}

BandLevels band_response(const ImpulseResponse& ir, std::span<const double> centers) {
  std::vector<double> edges;
  BandLevels out;
  for (double c : centers) {
    const double lo = c * std::exp2(-1.0 / 6.0);
    const double hi = c * std::exp2(1.0 / 6.0);
    const BandLevels one = band_energies(ir, std::vector<double>{lo, hi});
    out.centers.push_back(c);
    out.energy.push_back(one.energy[0]);
    out.level_db.push_back(one.level_db[0]);
  }
  return out;
}

double ComparisonReport::difference(std::size_t a, std::size_t b) const {
  for (const auto& p : pairs) {
    if ((p.a == a && p.b == b) || (p.a == b && p.b == a)) return p.mean_abs_db;
  }
  throw Error("no comparison for the requested pair");
}

std::string ComparisonReport::levels_csv() const {
  std::ostringstream os;
  os << std::setprecision(10) << "band_hz";
  for (const auto& l : labels) os << ',' << l;
  os << '\n';
  for (std::size_t b = 0; b < centers.size(); ++b) {
    os << centers[b];
    for (const auto& row : level_db) os << ',' << row[b];
    os << '\n';
  }
  return os.str();
}

std::string ComparisonReport::pairs_csv() const {
  std::ostringstream os;
  os << std::setprecision(10) << "a,b,band_lo_hz,band_hi_hz,mean_abs_diff_db\n";
  for (const auto& p : pairs) {
    os << labels[p.a] << ',' << labels[p.b] << ',' << band_lo << ',' << band_hi << ',' << p.mean_abs_db << '\n';
  }
  return os.str();
}

ComparisonReport compare_report(const std::vector<LabeledIr>& irs, double band_lo, double band_hi) {
  if (irs.size() < 2) throw Error("comparison needs at least two impulse responses");
  if (!(band_lo > 0.0 && band_hi >= band_lo)) throw Error("invalid comparison band range");
  ComparisonReport r;
  r.band_lo = band_lo;
  r.band_hi = band_hi;
  double nyquist = std::numeric_limits<double>::infinity();
  for (const auto& l : irs) nyquist = std::min(nyquist, 0.5 * l.ir.sample_rate);
  r.centers = third_octave_centers(band_lo, std::min(band_hi, nyquist * std::exp2(-1.0 / 6.0)));
  if (r.centers.empty()) throw Error("no third-octave band inside the comparison range");
  for (const auto& l : irs) {
    r.labels.push_back(l.label);
    r.level_db.push_back(band_response(l.ir, r.centers).level_db);
  }
  for (std::size_t a = 0; a < irs.size(); ++a) {
    for (std::size_t b = a + 1; b < irs.size(); ++b) {
      double sum = 0.0;
      for (std::size_t k = 0; k < r.centers.size(); ++k) sum += std::abs(r.level_db[a][k] - r.level_db[b][k]);
      r.pairs.push_back({a, b, sum / static_cast<double>(r.centers.size())});
    }
  }
  return r;
}

std::vector<double> direct_convolve(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

AugmentResult augment_speech(std::span<const double> clean, std::span<const double> ir, std::span<const double> noise,
                             std::optional<std::size_t> offset, double snr_db, std::uint64_t seed) {
  if (clean.empty()) throw Error("augmentation needs a non-empty clean signal");
  if (ir.empty()) throw Error("augmentation needs a non-empty impulse response");
  if (noise.empty()) throw Error("augmentation needs a non-empty noise signal");
  if (!std::isfinite(snr_db)) throw Error("snr must be finite");

  AugmentResult out;
  out.signal = dsp::fft_convolve(clean, ir);
  const std::size_t len = out.signal.size();
  if (offset) {
    if (*offset >= noise.size()) throw Error("noise offset past the end of the noise signal");
    out.offset = *offset;
  } else {
    const std::size_t hi = noise.size() >= len ? noise.size() - len : noise.size() - 1;
    std::mt19937_64 gen(mix_seed(seed));
    out.offset = std::uniform_int_distribution<std::size_t>(0, hi)(gen);
  }

  const double noise_power = dsp::energy(noise) / static_cast<double>(noise.size());
  if (!(noise_power > 0.0)) return out;
  std::vector<double> segment(len);
  for (std::size_t t = 0; t < len; ++t) segment[t] = noise[(out.offset + t) % noise.size()];
  const double seg_power = dsp::energy(segment) / static_cast<double>(len);
  if (!(seg_power > 0.0)) return out;
  const double sig_power = dsp::energy(out.signal) / static_cast<double>(len);
  out.noise_gain = std::sqrt(sig_power / (seg_power * std::pow(10.0, snr_db / 10.0)));
  for (std::size_t t = 0; t < len; ++t) out.signal[t] += out.noise_gain * segment[t];
  return out;
}

DatasetStats dataset_stats(std::span<const StatsRecord> records, double bin_width) {
  if (!(bin_width > 0.0)) throw Error("histogram bin width must be positive");
  DatasetStats s;
  s.bin_width = bin_width;
  for (const auto& r : records) {
    s.distances.push_back(distance(r.source, r.receiver));
    s.volume_rt60.emplace_back(r.scene_volume, r.rt60);
  }
  if (s.distances.empty()) return s;
  const auto [mn, mx] = std::minmax_element(s.distances.begin(), s.distances.end());
  const auto first = static_cast<long>(std::floor(*mn / bin_width));
  const auto last = static_cast<long>(std::floor(*mx / bin_width));
  s.bin_count.assign(static_cast<std::size_t>(last - first + 1), 0);
  for (long k = first; k <= last; ++k) s.bin_lower.push_back(static_cast<double>(k) * bin_width);
  for (double d : s.distances) ++s.bin_count[static_cast<std::size_t>(static_cast<long>(std::floor(d / bin_width)) - first)];
  return s;
}

std::string DatasetStats::distance_csv() const {
  std::ostringstream os;
  os << std::setprecision(10) << "bin_lower_m,bin_upper_m,count\n";
  for (std::size_t i = 0; i < bin_count.size(); ++i) {
    os << bin_lower[i] << ',' << bin_lower[i] + bin_width << ',' << bin_count[i] << '\n';
  }
  return os.str();
}

std::string DatasetStats::volume_rt60_csv() const {
  std::ostringstream os;
  os << std::setprecision(10) << "volume_m3,rt60_s\n";
  for (const auto& [v, t] : volume_rt60) os << v << ',' << t << '\n';
  return os.str();
}

std::string DatasetStats::distance_svg() const {
  constexpr double width = 480.0, height = 240.0, pad = 30.0;
  std::ostringstream os;
  os << std::setprecision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
  const std::size_t peak = bin_count.empty() ? 1 : std::max<std::size_t>(1, *std::max_element(bin_count.begin(), bin_count.end()));
  const double bar = bin_count.empty() ? 0.0 : (width - 2 * pad) / static_cast<double>(bin_count.size());
  for (std::size_t i = 0; i < bin_count.size(); ++i) {
    const double h = (height - 2 * pad) * static_cast<double>(bin_count[i]) / static_cast<double>(peak);
    os << "  <rect x=\"" << pad + bar * static_cast<double>(i) << "\" y=\"" << height - pad - h << "\" width=\""
       << bar * 0.9 << "\" height=\"" << h << "\" fill=\"steelblue\"><title>" << bin_lower[i] << "-"
       << bin_lower[i] + bin_width << " m: " << bin_count[i] << "</title></rect>\n";
  }
  os << "  <text x=\"" << pad << "\" y=\"" << height - 8 << "\" font-size=\"12\">source-receiver distance (m)</text>\n";
  os << "</svg>\n";
  return os.str();
}

}  // namespace roomir::analysis
