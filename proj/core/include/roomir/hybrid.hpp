#pragma once

#include <span>
#include <vector>

#include "roomir/dsp.hpp"
#include "roomir/signal.hpp"

namespace roomir::hybrid {

struct CrossoverSpec {
  double crossover_freq = 1400.0;
  /// Linkwitz-Riley order: a Butterworth of order lr_order / 2 applied twice.
  int lr_order = 4;
  double dc_cutoff = 10.0;

  void validate(double fs) const;
};

enum class Branch { low, high };

/// Sections of one crossover branch. For lr_order / 2 odd the high branch must be
/// polarity-inverted to sum flat; lr_branch_sign reports that.
dsp::Sos lr_branch_sos(const CrossoverSpec& spec, Branch branch, double fs);
double lr_branch_sign(const CrossoverSpec& spec, Branch branch);

std::vector<double> lr_crossover(std::span<const double> signal, const CrossoverSpec& spec, Branch branch, double fs);

/// Second-order Butterworth high-pass.
std::vector<double> dc_remove(std::span<const double> signal, double cutoff, double fs);

/// lr_low(dc_remove(eta * fdtd)) + lr_high(ga), zero-padded to the longer input.
ImpulseResponse combine(const ImpulseResponse& ir_fdtd, const ImpulseResponse& ir_ga, double eta_combined,
                        const CrossoverSpec& spec);

}  // namespace roomir::hybrid
