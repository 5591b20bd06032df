#include <doctest.h>

#include <complex>

#include "roomir/analysis.hpp"
#include "roomir/dsp.hpp"
#include "roomir/fdtd.hpp"
#include "support.hpp"

using namespace roomir;
using namespace roomir::dsp;

namespace {

// Naive DTFT of a finite sequence at frequency f.
double dtft_db(const std::vector<double>& h, double f, double fs) {
  std::complex<double> acc = 0.0;
  for (std::size_t n = 0; n < h.size(); ++n) acc += h[n] * std::polar(1.0, -2.0 * kPi * f / fs * static_cast<double>(n));
  return 20.0 * std::log10(std::abs(acc));
}

// Steady-state amplitude of a filtered sine, measured over the second half.
double sine_gain_db(const Sos& sos, double f, double fs) {
  const std::size_t n = static_cast<std::size_t>(fs);
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = std::sin(2.0 * kPi * f * static_cast<double>(i) / fs);
  const auto y = filter(sos, x);
  double px = 0.0, py = 0.0;
  for (std::size_t i = n / 2; i < n; ++i) {
    px += x[i] * x[i];
    py += y[i] * y[i];
  }
  return 10.0 * std::log10(py / px);
}

}  // namespace

TEST_CASE("butterworth low-pass: DC gain, -3.01 dB at cutoff, 24 dB per octave") {
  const double fs = 48000.0;
  for (int order = 1; order <= 8; ++order) {
    const Sos lp = butterworth(FilterKind::low_pass, order, 1000.0, fs);
    CHECK(std::abs(frequency_response(lp, 0.0, fs)) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(magnitude_db(lp, 1000.0, fs) == doctest::Approx(-3.0103).epsilon(0.05 / 3.0103));
    CHECK(lp.size() == static_cast<std::size_t>((order + 1) / 2));
  }
  const Sos lp4 = butterworth(FilterKind::low_pass, 4, 1000.0, fs);
  const double slope = magnitude_db(lp4, 4000.0, fs) - magnitude_db(lp4, 2000.0, fs);
  CHECK(slope == doctest::Approx(-24.0).epsilon(1.0 / 24.0));
}

TEST_CASE("butterworth high-pass mirrors the low-pass") {
  const double fs = 48000.0;
  const Sos hp = butterworth(FilterKind::high_pass, 4, 1000.0, fs);
  CHECK(std::abs(frequency_response(hp, 0.0, fs)) < 1e-12);
  CHECK(std::abs(frequency_response(hp, fs / 2, fs)) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(magnitude_db(hp, 1000.0, fs) == doctest::Approx(-3.0103).epsilon(0.05 / 3.0103));
  CHECK_THROWS_AS(butterworth(FilterKind::low_pass, 2, 0.0, fs), Error);
  CHECK_THROWS_AS(butterworth(FilterKind::low_pass, 2, fs / 2, fs), Error);
  CHECK_THROWS_AS(butterworth(FilterKind::low_pass, 0, 100.0, fs), Error);
}

TEST_CASE("time-domain filtering matches the analytic response") {
  const double fs = 8000.0;
  const Sos sos = cascade(butterworth(FilterKind::low_pass, 3, 500.0, fs), butterworth(FilterKind::high_pass, 2, 50.0, fs));
  for (double f : {100.0, 400.0, 700.0, 1500.0}) {
    CHECK(sine_gain_db(sos, f, fs) == doctest::Approx(magnitude_db(sos, f, fs)).epsilon(0.01));
  }
}

TEST_CASE("windowed-sinc low-pass") {
  const double fs = 25700.0;
  const auto h = fdtd::band_limited_impulse(255.0, fs);
  CHECK(h.size() % 2 == 1);
  CHECK(static_cast<double>(h.size()) == doctest::Approx(4.0 * fs / 255.0).epsilon(0.01));
  CHECK(std::accumulate(h.begin(), h.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(dtft_db(h, 2.0 * 255.0, fs) <= -60.0);
  for (std::size_t i = 0; i < h.size() / 2; ++i) CHECK(h[i] == doctest::Approx(h[h.size() - 1 - i]).epsilon(1e-12));
  CHECK_THROWS_AS(fdtd::band_limited_impulse(fs, fs), Error);

  // Towards fs/2 the coefficients approach a unit impulse.
  double previous = 0.0;
  for (double cutoff : {0.3 * fs, 0.4 * fs, 0.45 * fs, 0.49 * fs}) {
    const auto g = fdtd::band_limited_impulse(cutoff, fs);
    const double centre = g[g.size() / 2];
    const double ratio = centre * centre / energy(g);
    CHECK(ratio > previous);
    previous = ratio;
  }
  CHECK(previous > 0.95);
}

TEST_CASE("fractional pulse is centred and has unit DC gain") {
  const Pulse p = fractional_pulse(8000.0, 48000.0, 100.3, 12.0);
  CHECK(std::accumulate(p.taps.begin(), p.taps.end(), 0.0) == doctest::Approx(1.0));
  double m0 = 0.0, m1 = 0.0;
  for (std::size_t i = 0; i < p.taps.size(); ++i) {
    const double t = static_cast<double>(p.first) + static_cast<double>(i);
    m0 += p.taps[i] * p.taps[i];
    m1 += t * p.taps[i] * p.taps[i];
  }
  CHECK(m1 / m0 == doctest::Approx(100.3).epsilon(1e-3));
}

TEST_CASE("resample preserves an in-band sine") {
  const double fs_in = 25713.0;
  const double fs_out = 48000.0;
  std::vector<double> x(static_cast<std::size_t>(fs_in / 2));
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(2.0 * kPi * 700.0 * static_cast<double>(i) / fs_in);
  const auto y = resample(x, fs_in, fs_out);
  CHECK(static_cast<double>(y.size()) == doctest::Approx(static_cast<double>(x.size()) * fs_out / fs_in).epsilon(1e-3));
  double worst = 0.0;
  for (std::size_t m = 1000; m + 1000 < y.size(); ++m) {
    worst = std::max(worst, std::abs(y[m] - std::sin(2.0 * kPi * 700.0 * static_cast<double>(m) / fs_out)));
  }
  CHECK(worst < 2e-3);

  // Decimation removes content above the new Nyquist.
  std::vector<double> hi(48000);
  for (std::size_t i = 0; i < hi.size(); ++i) hi[i] = std::sin(2.0 * kPi * 15000.0 * static_cast<double>(i) / 48000.0);
  const auto down = resample(hi, 48000.0, 16000.0);
  double peak = 0.0;
  for (std::size_t m = 500; m + 500 < down.size(); ++m) peak = std::max(peak, std::abs(down[m]));
  CHECK(peak < 1e-3);
}

TEST_CASE("FFT helpers") {
  CHECK(next_pow2(1) == 1);
  CHECK(next_pow2(5) == 8);
  CHECK(next_pow2(1024) == 1024);
  const auto x = roomir::test::white_noise(1000, 2);
  const auto spec = rfft(x, 1024);
  CHECK(spec.size() == 513);
  const auto back = irfft(spec, 1024);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(back[i] == doctest::Approx(x[i]).epsilon(1e-12));
  for (std::size_t i = x.size(); i < back.size(); ++i) CHECK(std::abs(back[i]) < 1e-12);
}

TEST_CASE("fft_convolve agrees with the direct sum") {
  for (std::size_t n : {1u, 7u, 300u, 4096u}) {
    for (std::size_t m : {1u, 33u, 4096u}) {
      const auto a = roomir::test::white_noise(n, n * 31 + m);
      const auto b = roomir::test::white_noise(m, n + m * 7);
      const auto fast = fft_convolve(a, b);
      const auto slow = analysis::direct_convolve(a, b);
      REQUIRE(fast.size() == slow.size());
      double worst = 0.0;
      for (std::size_t i = 0; i < fast.size(); ++i) worst = std::max(worst, std::abs(fast[i] - slow[i]));
      CHECK(worst < 1e-9);
    }
  }
}
