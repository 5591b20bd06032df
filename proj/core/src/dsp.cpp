#include "roomir/dsp.hpp"

#include <algorithm>
#include <mutex>
#include <numeric>

#include <fftw3.h>

#include "roomir/common.hpp"

namespace roomir::dsp {

namespace {

double blackman(double t) {
  // t in [-1, 1] across the window support.
  if (t <= -1.0 || t >= 1.0) return 0.0;
  return 0.42 + 0.5 * std::cos(kPi * t) + 0.08 * std::cos(2.0 * kPi * t);
}

double sinc(double x) {
  if (x == 0.0) return 1.0;
  return std::sin(kPi * x) / (kPi * x);
}

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

Sos butterworth(FilterKind kind, int order, double cutoff, double fs) {
  if (order < 1) throw Error("butterworth order must be >= 1");
  if (!(cutoff > 0.0 && cutoff < 0.5 * fs)) {
    throw Error("butterworth cutoff " + std::to_string(cutoff) + " Hz outside (0, fs/2)");
  }
  // Prewarped analog cutoff with the bilinear constant folded to 1.
  const double w = std::tan(kPi * cutoff / fs);
  const double w2 = w * w;
  Sos sos;
  for (int k = 0; k < order / 2; ++k) {
    const double theta = kPi * (2.0 * k + 1.0) / (2.0 * order);
    const double a = 2.0 * w * std::sin(theta);  // s^2 + a s + w^2
    const double a0 = 1.0 + a + w2;
    Biquad q;
    q.a1 = (2.0 * w2 - 2.0) / a0;
    q.a2 = (1.0 - a + w2) / a0;
    if (kind == FilterKind::low_pass) {
      q.b0 = w2 / a0;
      q.b1 = 2.0 * w2 / a0;
      q.b2 = w2 / a0;
    } else {
      q.b0 = 1.0 / a0;
      q.b1 = -2.0 / a0;
      q.b2 = 1.0 / a0;
    }
    sos.push_back(q);
  }
  if (order % 2 == 1) {
    const double a0 = 1.0 + w;
    Biquad q;
    q.a1 = (w - 1.0) / a0;
    if (kind == FilterKind::low_pass) {
      q.b0 = w / a0;
      q.b1 = w / a0;
    } else {
      q.b0 = 1.0 / a0;
      q.b1 = -1.0 / a0;
    }
    sos.push_back(q);
  }
  return sos;
}

Sos cascade(const Sos& a, const Sos& b) {
  Sos out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

std::complex<double> frequency_response(const Sos& sos, double freq, double fs) {
  const std::complex<double> z1 = std::polar(1.0, -2.0 * kPi * freq / fs);
  const std::complex<double> z2 = z1 * z1;
  std::complex<double> h = 1.0;
  for (const auto& q : sos) h *= (q.b0 + q.b1 * z1 + q.b2 * z2) / (1.0 + q.a1 * z1 + q.a2 * z2);
  return h;
}

void filter_inplace(const Sos& sos, std::span<double> x) {
  for (const auto& q : sos) {
    double s1 = 0.0, s2 = 0.0;
    for (double& v : x) {
      const double in = v;
      const double out = q.b0 * in + s1;
      s1 = q.b1 * in - q.a1 * out + s2;
      s2 = q.b2 * in - q.a2 * out;
      v = out;
    }
  }
}

std::vector<double> filter(const Sos& sos, std::span<const double> x) {
  std::vector<double> y(x.begin(), x.end());
  filter_inplace(sos, y);
  return y;
}

std::vector<double> windowed_sinc_lowpass(double cutoff, double fs, std::size_t length) {
  if (!(cutoff > 0.0 && cutoff <= 0.5 * fs)) throw Error("low-pass cutoff outside (0, fs/2]");
  if (length % 2 == 0) ++length;
  const double center = 0.5 * static_cast<double>(length - 1);
  const double fc = cutoff / fs;
  std::vector<double> h(length);
  for (std::size_t n = 0; n < length; ++n) {
    const double t = static_cast<double>(n) - center;
    // Support extends half a tap past the end points so the end taps stay nonzero.
    h[n] = 2.0 * fc * sinc(2.0 * fc * t) * blackman(t / (center + 1.0));
  }
  const double sum = std::accumulate(h.begin(), h.end(), 0.0);
  for (double& v : h) v /= sum;
  return h;
}

Pulse fractional_pulse(double cutoff, double fs, double center, double half_width) {
  Pulse p;
  const double fc = cutoff / fs;
  p.first = static_cast<long>(std::ceil(center - half_width));
  const long last = static_cast<long>(std::floor(center + half_width));
  for (long n = p.first; n <= last; ++n) {
    const double t = static_cast<double>(n) - center;
    p.taps.push_back(2.0 * fc * sinc(2.0 * fc * t) * blackman(t / half_width));
  }
  const double sum = std::accumulate(p.taps.begin(), p.taps.end(), 0.0);
  for (double& v : p.taps) v /= sum;
  return p;
}

std::vector<double> resample(std::span<const double> x, double fs_in, double fs_out) {
  if (!(fs_in > 0.0 && fs_out > 0.0)) throw Error("sample rates must be positive");
  if (x.empty()) return {};
  if (fs_in == fs_out) return {x.begin(), x.end()};
  // Cutoff relative to the input rate; lowered when decimating.
  const double rho = 0.9 * std::min(1.0, fs_out / fs_in);
  const double half = 32.0 / rho;
  const auto n_out = static_cast<std::size_t>(std::ceil(static_cast<double>(x.size()) * fs_out / fs_in));
  std::vector<double> y(n_out, 0.0);
  const long n_in = static_cast<long>(x.size());
  for (std::size_t m = 0; m < n_out; ++m) {
    const double pos = static_cast<double>(m) * fs_in / fs_out;
    const long lo = std::max(0L, static_cast<long>(std::ceil(pos - half)));
    const long hi = std::min(n_in - 1, static_cast<long>(std::floor(pos + half)));
    double acc = 0.0;
    for (long n = lo; n <= hi; ++n) {
      const double t = pos - static_cast<double>(n);
      acc += x[static_cast<std::size_t>(n)] * rho * sinc(rho * t) * blackman(t / half);
    }
    y[m] = acc;
  }
  return y;
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

std::vector<std::complex<double>> rfft(std::span<const double> x, std::size_t n) {
  if (n == 0) return {};
  double* in = fftw_alloc_real(n);
  fftw_complex* out = fftw_alloc_complex(n / 2 + 1);
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in, out, FFTW_ESTIMATE);
  }
  const std::size_t m = std::min(n, x.size());
  std::copy_n(x.begin(), m, in);
  std::fill(in + m, in + n, 0.0);
  fftw_execute(plan);
  std::vector<std::complex<double>> spec(n / 2 + 1);
  for (std::size_t k = 0; k < spec.size(); ++k) spec[k] = {out[k][0], out[k][1]};
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(in);
  fftw_free(out);
  return spec;
}

std::vector<double> irfft(std::span<const std::complex<double>> spectrum, std::size_t n) {
  if (spectrum.size() != n / 2 + 1) throw Error("irfft: spectrum size does not match n");
  fftw_complex* in = fftw_alloc_complex(n / 2 + 1);
  double* out = fftw_alloc_real(n);
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_c2r_1d(static_cast<int>(n), in, out, FFTW_ESTIMATE);
  }
  for (std::size_t k = 0; k < spectrum.size(); ++k) {
    in[k][0] = spectrum[k].real();
    in[k][1] = spectrum[k].imag();
  }
  fftw_execute(plan);
  std::vector<double> y(out, out + n);
  for (double& v : y) v /= static_cast<double>(n);
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(in);
  fftw_free(out);
  return y;
}

std::vector<double> fft_convolve(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  const std::size_t len = a.size() + b.size() - 1;
  const std::size_t n = next_pow2(len);
  auto fa = rfft(a, n);
  const auto fb = rfft(b, n);
  for (std::size_t k = 0; k < fa.size(); ++k) fa[k] *= fb[k];
  auto y = irfft(fa, n);
  y.resize(len);
  return y;
}

double energy(std::span<const double> x) {
  return std::inner_product(x.begin(), x.end(), x.begin(), 0.0);
}

}  // namespace roomir::dsp
