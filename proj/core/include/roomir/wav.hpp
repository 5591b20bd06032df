#pragma once

#include <filesystem>

#include "roomir/signal.hpp"

namespace roomir::wav {

/// Mono 32-bit IEEE float WAV with a 44-byte header. Samples are rounded to float.
void write(const ImpulseResponse& ir, const std::filesystem::path& path);

/// Reads mono PCM16, PCM24, PCM32 or float32/float64 WAV files. PCM is scaled to [-1, 1).
ImpulseResponse read(const std::filesystem::path& path);

}  // namespace roomir::wav
