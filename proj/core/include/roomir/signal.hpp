#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "roomir/common.hpp"

namespace roomir {

enum class IrOrigin { ga, fdtd, hybrid, measured };

std::string_view to_string(IrOrigin origin);
IrOrigin origin_from_string(std::string_view text);

/// Uniformly sampled pressure response; t = 0 is the source onset.
struct ImpulseResponse {
  std::vector<double> samples;
  double sample_rate = 0.0;
  IrOrigin origin = IrOrigin::measured;
  std::size_t onset_index = 0;

  std::size_t size() const { return samples.size(); }
  double duration() const { return static_cast<double>(samples.size()) / sample_rate; }

  /// Throws Error on a non-positive rate, non-finite samples or an onset past the end.
  void validate() const;
};

}  // namespace roomir
