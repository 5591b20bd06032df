#include "roomir/signal.hpp"

#include <algorithm>
#include <cmath>

namespace roomir {

std::string_view to_string(IrOrigin origin) {
  switch (origin) {
    case IrOrigin::ga: return "ga";
    case IrOrigin::fdtd: return "fdtd";
    case IrOrigin::hybrid: return "hybrid";
    case IrOrigin::measured: return "measured";
  }
  return "measured";
}

IrOrigin origin_from_string(std::string_view text) {
  if (text == "ga") return IrOrigin::ga;
  if (text == "fdtd") return IrOrigin::fdtd;
  if (text == "hybrid") return IrOrigin::hybrid;
  if (text == "measured") return IrOrigin::measured;
  throw Error("unknown IR origin '" + std::string(text) + "'");
}

void ImpulseResponse::validate() const {
  if (!(sample_rate > 0.0)) throw Error("impulse response sample rate must be positive");
  if (!samples.empty() && onset_index >= samples.size()) throw Error("impulse response onset past the end");
  if (!std::all_of(samples.begin(), samples.end(), [](double v) { return std::isfinite(v); })) {
    throw Error("impulse response has non-finite samples");
  }
}

}  // namespace roomir
