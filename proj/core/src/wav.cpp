#include "roomir/wav.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

namespace roomir::wav {

static_assert(std::endian::native == std::endian::little, "WAV I/O assumes a little-endian host");

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xfffe;

template <typename T>
void put(std::ofstream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(const std::vector<char>& buf, std::size_t pos) {
  T v;
  std::memcpy(&v, buf.data() + pos, sizeof(T));
  return v;
}

}  // namespace

void write(const ImpulseResponse& ir, const std::filesystem::path& path) {
  if (ir.samples.empty()) throw Error("refusing to write an empty impulse response to " + path.string());
  ir.validate();
  const auto rate = static_cast<std::uint32_t>(std::lround(ir.sample_rate));
  if (std::abs(static_cast<double>(rate) - ir.sample_rate) > 1e-6) {
    throw Error("WAV needs an integer sample rate, got " + std::to_string(ir.sample_rate));
  }
  const auto data_bytes = static_cast<std::uint64_t>(ir.samples.size()) * 4;
  if (data_bytes > 0xffffffffull - 36) throw Error("impulse response too long for a WAV file");

  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  os.write("RIFF", 4);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(36 + data_bytes));
  os.write("WAVEfmt ", 8);
  put<std::uint32_t>(os, 16);
  put<std::uint16_t>(os, kFormatFloat);
  put<std::uint16_t>(os, 1);
  put<std::uint32_t>(os, rate);
  put<std::uint32_t>(os, rate * 4);
  put<std::uint16_t>(os, 4);
  put<std::uint16_t>(os, 32);
  os.write("data", 4);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(data_bytes));
  std::vector<float> f(ir.samples.begin(), ir.samples.end());
  os.write(reinterpret_cast<const char*>(f.data()), static_cast<std::streamsize>(f.size() * sizeof(float)));
  if (!os) throw Error("failed writing " + path.string());
}

ImpulseResponse read(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path.string());
  const std::vector<char> buf((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  const std::string name = path.string();
  if (buf.size() < 12 || std::memcmp(buf.data(), "RIFF", 4) != 0 || std::memcmp(buf.data() + 8, "WAVE", 4) != 0) {
    throw Error(name + ": not a RIFF/WAVE file");
  }

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= buf.size()) {
    const std::string id(buf.data() + pos, 4);
    const auto size = get<std::uint32_t>(buf, pos + 4);
    const std::size_t body = pos + 8;
    const std::size_t avail = std::min<std::size_t>(size, buf.size() - body);
    if (id == "fmt ") {
      if (avail < 16) throw Error(name + ": truncated fmt chunk");
      format = get<std::uint16_t>(buf, body);
      channels = get<std::uint16_t>(buf, body + 2);
      rate = get<std::uint32_t>(buf, body + 4);
      bits = get<std::uint16_t>(buf, body + 14);
      if (format == kFormatExtensible && avail >= 26) format = get<std::uint16_t>(buf, body + 24);
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw Error(name + ": data chunk before fmt chunk");
      if (channels != 1) throw Error(name + ": expected mono audio, found " + std::to_string(channels) + " channels");
      if (rate == 0) throw Error(name + ": zero sample rate");
      const std::size_t width = bits / 8;
      const bool ok = (format == kFormatPcm && (bits == 16 || bits == 24 || bits == 32)) ||
                      (format == kFormatFloat && (bits == 32 || bits == 64));
      if (!ok) throw Error(name + ": unsupported sample format " + std::to_string(format) + "/" + std::to_string(bits) + " bit");
      ImpulseResponse ir;
      ir.sample_rate = rate;
      const std::size_t n = avail / width;
      ir.samples.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t at = body + i * width;
        double v = 0.0;
        if (format == kFormatFloat) {
          v = bits == 32 ? static_cast<double>(get<float>(buf, at)) : get<double>(buf, at);
        } else if (bits == 16) {
          v = get<std::int16_t>(buf, at) / 32768.0;
        } else if (bits == 24) {
          const auto b0 = static_cast<std::uint8_t>(buf[at]);
          const auto b1 = static_cast<std::uint8_t>(buf[at + 1]);
          const auto b2 = static_cast<std::uint8_t>(buf[at + 2]);
          auto raw = static_cast<std::int32_t>(b0 | (b1 << 8) | (b2 << 16));
          if (raw & 0x800000) raw -= 0x1000000;
          v = raw / 8388608.0;
        } else {
          v = get<std::int32_t>(buf, at) / 2147483648.0;
        }
        ir.samples[i] = v;
      }
      if (ir.samples.empty()) throw Error(name + ": no samples");
      return ir;
    }
    pos = body + size + (size & 1);
  }
  throw Error(name + ": no data chunk");
}

}  // namespace roomir::wav
