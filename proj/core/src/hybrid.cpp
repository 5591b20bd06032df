#include "roomir/hybrid.hpp"

#include <algorithm>

namespace roomir::hybrid {

void CrossoverSpec::validate(double fs) const {
  if (!(dc_cutoff > 0.0 && dc_cutoff < crossover_freq && crossover_freq < 0.5 * fs)) {
    throw Error("crossover requires 0 < dc_cutoff < crossover_freq < fs/2");
  }
  if (lr_order < 2 || lr_order % 2 != 0) throw Error("Linkwitz-Riley order must be even and >= 2");
}

dsp::Sos lr_branch_sos(const CrossoverSpec& spec, Branch branch, double fs) {
  spec.validate(fs);
  const auto kind = branch == Branch::low ? dsp::FilterKind::low_pass : dsp::FilterKind::high_pass;
  const dsp::Sos half = dsp::butterworth(kind, spec.lr_order / 2, spec.crossover_freq, fs);
  return dsp::cascade(half, half);
}

double lr_branch_sign(const CrossoverSpec& spec, Branch branch) {
  return (branch == Branch::high && (spec.lr_order / 2) % 2 == 1) ? -1.0 : 1.0;
}

std::vector<double> lr_crossover(std::span<const double> signal, const CrossoverSpec& spec, Branch branch, double fs) {
  auto y = dsp::filter(lr_branch_sos(spec, branch, fs), signal);
  const double sign = lr_branch_sign(spec, branch);
  if (sign < 0.0) {
    for (double& v : y) v = -v;
  }
  return y;
}

std::vector<double> dc_remove(std::span<const double> signal, double cutoff, double fs) {
  return dsp::filter(dsp::butterworth(dsp::FilterKind::high_pass, 2, cutoff, fs), signal);
}

ImpulseResponse combine(const ImpulseResponse& ir_fdtd, const ImpulseResponse& ir_ga, double eta_combined,
                        const CrossoverSpec& spec) {
  if (ir_fdtd.sample_rate != ir_ga.sample_rate) throw Error("combine: sample-rate mismatch");
  if (!(eta_combined > 0.0)) throw Error("combine: calibration factor must be positive");
  const double fs = ir_ga.sample_rate;
  spec.validate(fs);
  const std::size_t n = std::max(ir_fdtd.size(), ir_ga.size());

  std::vector<double> low(n, 0.0);
  std::transform(ir_fdtd.samples.begin(), ir_fdtd.samples.end(), low.begin(),
                 [eta_combined](double v) { return eta_combined * v; });
  dsp::filter_inplace(dsp::butterworth(dsp::FilterKind::high_pass, 2, spec.dc_cutoff, fs), low);
  low = lr_crossover(low, spec, Branch::low, fs);

  std::vector<double> high(n, 0.0);
  std::copy(ir_ga.samples.begin(), ir_ga.samples.end(), high.begin());
  high = lr_crossover(high, spec, Branch::high, fs);

  ImpulseResponse out;
  out.sample_rate = fs;
  out.origin = IrOrigin::hybrid;
  out.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.samples[i] = low[i] + high[i];
  return out;
}

}  // namespace roomir::hybrid
