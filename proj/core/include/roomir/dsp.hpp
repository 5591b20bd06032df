#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace roomir::dsp {

/// One second-order section, a0 normalized to 1.
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;
};
using Sos = std::vector<Biquad>;

enum class FilterKind { low_pass, high_pass };

/// Digital Butterworth by the bilinear transform with prewarping at `cutoff`.
/// Odd orders get one first-order section (b2 = a2 = 0).
Sos butterworth(FilterKind kind, int order, double cutoff, double fs);

/// Concatenation of two cascades.
Sos cascade(const Sos& a, const Sos& b);

std::complex<double> frequency_response(const Sos& sos, double freq, double fs);
inline double magnitude_db(const Sos& sos, double freq, double fs) {
  return 20.0 * std::log10(std::abs(frequency_response(sos, freq, fs)));
}

/// Causal filtering, transposed direct form II, zero initial state.
void filter_inplace(const Sos& sos, std::span<double> x);
std::vector<double> filter(const Sos& sos, std::span<const double> x);

/// Odd-length Blackman-windowed sinc low-pass, coefficients summing to 1.
std::vector<double> windowed_sinc_lowpass(double cutoff, double fs, std::size_t length);

/// Blackman-windowed sinc pulse centred on the fractional sample `center`,
/// unit DC gain. Returns the taps starting at sample index `first`.
struct Pulse {
  long first = 0;
  std::vector<double> taps;
};
Pulse fractional_pulse(double cutoff, double fs, double center, double half_width);

/// Band-limited interpolation between arbitrary rates (Blackman-windowed sinc kernel).
std::vector<double> resample(std::span<const double> x, double fs_in, double fs_out);

std::size_t next_pow2(std::size_t n);

/// Real FFT of `x` zero-padded to `n`; returns n/2 + 1 bins.
std::vector<std::complex<double>> rfft(std::span<const double> x, std::size_t n);
/// Inverse of rfft, normalized.
std::vector<double> irfft(std::span<const std::complex<double>> spectrum, std::size_t n);

/// Full linear convolution (length a + b - 1) through the FFT.
std::vector<double> fft_convolve(std::span<const double> a, std::span<const double> b);

double energy(std::span<const double> x);

}  // namespace roomir::dsp
