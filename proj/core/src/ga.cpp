#include "roomir/ga.hpp"

#include <algorithm>
#include <atomic>
#include <numeric>
#include <random>
#include <thread>

namespace roomir::ga {

namespace {

constexpr int kRaysPerChunk = 256;

double unit_uniform(std::mt19937_64& gen) { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

Vec3 uniform_sphere(std::mt19937_64& gen) {
  const double z = 1.0 - 2.0 * unit_uniform(gen);
  const double phi = 2.0 * kPi * unit_uniform(gen);
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {r * std::cos(phi), r * std::sin(phi), z};
}

/// Cosine-weighted direction in the hemisphere around unit normal n.
Vec3 cosine_hemisphere(Vec3 n, std::mt19937_64& gen) {
  const double u1 = unit_uniform(gen);
  const double u2 = unit_uniform(gen);
  const double r = std::sqrt(u1);
  const double phi = 2.0 * kPi * u2;
  const Vec3 helper = std::abs(n.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
  const Vec3 t = normalized(cross(helper, n));
  const Vec3 b = cross(n, t);
  return normalized(t * (r * std::cos(phi)) + b * (r * std::sin(phi)) + n * std::sqrt(std::max(0.0, 1.0 - u1)));
}

struct ChunkResult {
  std::vector<double> bins;  // bin-major, kBandCount per bin
  BandSpectrum absorbed{};
  BandSpectrum escaped{};
  BandSpectrum residual{};
};

struct TraceContext {
  const scene::TriangleBvh* bvh;
  const scene::TriangleMesh* mesh;
  std::span<const Surface> surfaces;
  std::vector<Vec3> normals;
  Vec3 source;
  Vec3 receiver;
  const GaConfig* cfg;
  std::size_t bin_count;
};

void trace_ray(const TraceContext& ctx, int ray, ChunkResult& out) {
  const GaConfig& cfg = *ctx.cfg;
  std::mt19937_64 gen(mix_seed(cfg.rng_seed, static_cast<std::uint64_t>(ray)));
  const double e0 = 1.0 / cfg.ray_count;
  BandSpectrum energy;
  energy.fill(e0);
  const double floor_total = cfg.energy_floor * e0 * kBandCount;
  const double max_path = cfg.duration * cfg.speed_of_sound;
  const double r2 = cfg.receiver_radius * cfg.receiver_radius;
  const double weight = 1.0 / (kPi * r2);

  Vec3 origin = ctx.source;
  Vec3 dir = uniform_sphere(gen);
  double path = 0.0;
  for (int depth = 0;; ++depth) {
    const double remaining = max_path - path;
    if (remaining <= 0.0) break;
    const auto hit = ctx.bvh->closest_hit(origin, dir, remaining);
    const double seg = hit ? hit->t : remaining;

    // Receiver detection on reflected segments; the direct path is added analytically.
    if (depth > 0) {
      const Vec3 v = ctx.receiver - origin;
      const double t = dot(v, dir);
      if (t >= 0.0 && t <= seg) {
        const Vec3 off = v - dir * t;
        if (dot(off, off) < r2) {
          const double time = (path + t) / cfg.speed_of_sound;
          const auto bin = static_cast<std::size_t>(time / cfg.bin_width);
          if (bin < ctx.bin_count) {
            for (int b = 0; b < kBandCount; ++b) out.bins[bin * kBandCount + b] += energy[b] * weight;
          }
        }
      }
    }

    if (!hit) {
      // Either out of time inside the scene, or escaped through an opening.
      const bool bounded = ctx.bvh->closest_hit(origin, dir, std::numeric_limits<double>::infinity()).has_value();
      auto& sink = bounded ? out.residual : out.escaped;
      for (int b = 0; b < kBandCount; ++b) sink[b] += energy[b];
      return;
    }

    path += hit->t;
    const Vec3 point = origin + dir * hit->t;
    const std::uint32_t tri = hit->triangle;
    const Surface& surf = ctx.surfaces[ctx.mesh->triangle_material[tri]];
    double total = 0.0;
    for (int b = 0; b < kBandCount; ++b) {
      const double lost = energy[b] * surf.absorption[b];
      out.absorbed[b] += lost;
      energy[b] -= lost;
      total += energy[b];
    }
    if (depth + 1 >= cfg.max_depth || total < floor_total) {
      for (int b = 0; b < kBandCount; ++b) out.residual[b] += energy[b];
      return;
    }

    Vec3 n = ctx.normals[tri];
    if (dot(n, dir) > 0.0) n = -n;
    if (unit_uniform(gen) < surf.scattering[kBand1k]) {
      dir = cosine_hemisphere(n, gen);
    } else {
      dir = normalized(dir - n * (2.0 * dot(dir, n)));
    }
    origin = point + n * 1e-7;
  }
  for (int b = 0; b < kBandCount; ++b) out.residual[b] += energy[b];
}

}  // namespace

void GaConfig::validate() const {
  if (ray_count < 1) throw Error("ray_count must be >= 1");
  if (max_depth < 1) throw Error("max_depth must be >= 1");
  if (!(energy_floor > 0.0 && energy_floor < 1.0)) throw Error("energy_floor must be in (0, 1)");
  if (!(duration > 0.0)) throw Error("duration must be positive");
  if (!(sample_rate > 0.0)) throw Error("sample_rate must be positive");
  if (!(speed_of_sound > 0.0)) throw Error("speed of sound must be positive");
  if (!(receiver_radius > 0.0)) throw Error("receiver radius must be positive");
  if (!(bin_width > 0.0)) throw Error("bin width must be positive");
}

bool EnergyHistogram::open_mesh() const {
  return std::any_of(escaped.begin(), escaped.end(), [](double e) { return e > 0.0; });
}

BandSpectrum EnergyHistogram::band_totals() const {
  BandSpectrum t = direct_energy;
  for (const auto& bin : bins) {
    for (int b = 0; b < kBandCount; ++b) t[b] += bin[b];
  }
  return t;
}

EnergyHistogram trace(const scene::TriangleMesh& mesh, std::span<const Surface> surfaces, Vec3 source,
                      Vec3 receiver, const GaConfig& cfg) {
  cfg.validate();
  if (mesh.triangles.empty()) throw Error("ga trace: mesh has no triangles");
  for (auto m : mesh.triangle_material) {
    if (m >= surfaces.size()) throw Error("ga trace: triangle material has no surface data");
  }
  const scene::TriangleBvh bvh(mesh);
  if (scene::is_closed(mesh)) {
    if (!scene::inside_closed_mesh(bvh, source)) throw Error("ga trace: source outside the air region");
    if (!scene::inside_closed_mesh(bvh, receiver)) throw Error("ga trace: receiver outside the air region");
  }

  TraceContext ctx{&bvh, &mesh, surfaces, {}, source, receiver, &cfg, 0};
  ctx.normals.reserve(mesh.size());
  for (std::size_t i = 0; i < mesh.size(); ++i) {
    const auto t = mesh.triangle(i);
    ctx.normals.push_back(normalized(cross(t.b - t.a, t.c - t.a)));
  }
  ctx.bin_count = static_cast<std::size_t>(std::ceil(cfg.duration / cfg.bin_width - 1e-9));

  const int chunks = (cfg.ray_count + kRaysPerChunk - 1) / kRaysPerChunk;
  std::vector<ChunkResult> results(static_cast<std::size_t>(chunks));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int c = next.fetch_add(1); c < chunks; c = next.fetch_add(1)) {
      ChunkResult& r = results[static_cast<std::size_t>(c)];
      r.bins.assign(ctx.bin_count * kBandCount, 0.0);
      const int end = std::min(cfg.ray_count, (c + 1) * kRaysPerChunk);
      for (int ray = c * kRaysPerChunk; ray < end; ++ray) trace_ray(ctx, ray, r);
    }
  };
  int threads = cfg.threads > 0 ? cfg.threads : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, chunks);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  EnergyHistogram h;
  h.bin_width = cfg.bin_width;
  h.bins.assign(ctx.bin_count, BandSpectrum{});
  for (const auto& r : results) {
    for (std::size_t i = 0; i < ctx.bin_count; ++i) {
      for (int b = 0; b < kBandCount; ++b) h.bins[i][b] += r.bins[i * kBandCount + b];
    }
    for (int b = 0; b < kBandCount; ++b) {
      h.absorbed[b] += r.absorbed[b];
      h.escaped[b] += r.escaped[b];
      h.residual[b] += r.residual[b];
    }
  }

  const double d = distance(source, receiver);
  h.direct_time = d / cfg.speed_of_sound;
  if (d > 0.0 && h.direct_time < cfg.duration && !bvh.occluded(source, receiver)) {
    h.direct_energy.fill(1.0 / (4.0 * kPi * d * d));
  }
  return h;
}

double direct_pulse_cutoff(double sample_rate) {
  return std::min(kOctaveCenters.back() * std::sqrt(2.0), 0.45 * sample_rate);
}

dsp::Pulse direct_pulse(const BandSpectrum& band_energy, double time, double sample_rate) {
  const double cutoff = direct_pulse_cutoff(sample_rate);
  dsp::Pulse p = dsp::fractional_pulse(cutoff, sample_rate, time * sample_rate, 2.0 * sample_rate / cutoff);
  const double target = std::accumulate(band_energy.begin(), band_energy.end(), 0.0);
  const double scale = std::sqrt(target / dsp::energy(p.taps));
  for (double& v : p.taps) v *= scale;
  return p;
}

dsp::Sos octave_bandpass(int band, double sample_rate) {
  const double lo = kOctaveCenters[static_cast<std::size_t>(band)] / std::sqrt(2.0);
  const double hi = kOctaveCenters[static_cast<std::size_t>(band)] * std::sqrt(2.0);
  dsp::Sos sos = dsp::butterworth(dsp::FilterKind::high_pass, 4, lo, sample_rate);
  if (hi < 0.49 * sample_rate) sos = dsp::cascade(sos, dsp::butterworth(dsp::FilterKind::low_pass, 4, hi, sample_rate));
  return sos;
}

ImpulseResponse synthesize_ir(const EnergyHistogram& hist, const GaConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  ImpulseResponse ir;
  ir.sample_rate = cfg.sample_rate;
  ir.origin = IrOrigin::ga;
  const auto n = static_cast<std::size_t>(std::llround(cfg.duration * cfg.sample_rate));
  ir.samples.assign(n, 0.0);

  const double spb = hist.bin_width * cfg.sample_rate;
  for (int b = 0; b < kBandCount; ++b) {
    const bool any = std::any_of(hist.bins.begin(), hist.bins.end(), [b](const BandSpectrum& e) { return e[b] > 0.0; });
    if (!any) continue;
    if (kOctaveCenters[static_cast<std::size_t>(b)] / std::sqrt(2.0) >= 0.5 * cfg.sample_rate) continue;
    std::mt19937_64 gen(mix_seed(seed, static_cast<std::uint64_t>(b) + 1));
    std::vector<double> noise(n);
    for (double& v : noise) {
      const double u1 = 1.0 - unit_uniform(gen);
      const double u2 = unit_uniform(gen);
      v = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    }
    dsp::filter_inplace(octave_bandpass(b, cfg.sample_rate), noise);
    const double var = dsp::energy(noise) / static_cast<double>(n);
    if (var <= 0.0) continue;
    const double norm_gain = 1.0 / std::sqrt(var);
    for (std::size_t i = 0; i < n; ++i) {
      const auto bin = static_cast<std::size_t>(static_cast<double>(i) / spb);
      if (bin >= hist.bins.size()) break;
      const double first = std::ceil(static_cast<double>(bin) * spb);
      const double last = std::ceil(static_cast<double>(bin + 1) * spb);
      const double samples_in_bin = std::max(1.0, last - first);
      ir.samples[i] += noise[i] * norm_gain * std::sqrt(hist.bins[bin][b] / samples_in_bin);
    }
  }

  const double direct_total = std::accumulate(hist.direct_energy.begin(), hist.direct_energy.end(), 0.0);
  if (direct_total > 0.0) {
    const auto p = direct_pulse(hist.direct_energy, hist.direct_time, cfg.sample_rate);
    for (std::size_t k = 0; k < p.taps.size(); ++k) {
      const long idx = p.first + static_cast<long>(k);
      if (idx >= 0 && static_cast<std::size_t>(idx) < n) ir.samples[static_cast<std::size_t>(idx)] += p.taps[k];
    }
  }
  return ir;
}

namespace {

void check_closed_surfaces(const scene::TriangleMesh& mesh, std::span<const Surface> surfaces, int band) {
  if (band < 0 || band >= kBandCount) throw Error("band index out of range");
  if (!scene::is_closed(mesh)) throw Error("reverberation estimate needs a closed mesh");
  for (auto m : mesh.triangle_material) {
    if (m >= surfaces.size()) throw Error("triangle material has no surface data");
  }
}

}  // namespace

double sabine_rt60(const scene::TriangleMesh& mesh, std::span<const Surface> surfaces, int band) {
  check_closed_surfaces(mesh, surfaces, band);
  double absorption_area = 0.0;
  for (std::size_t i = 0; i < mesh.size(); ++i) {
    absorption_area += geom::triangle_area(mesh.triangle(i)) *
                       surfaces[mesh.triangle_material[i]].absorption[static_cast<std::size_t>(band)];
  }
  if (absorption_area <= 0.0) throw Error("zero absorption area");
  return 0.161 * scene::enclosed_volume(mesh) / absorption_area;
}

double eyring_rt60(const scene::TriangleMesh& mesh, std::span<const Surface> surfaces, int band) {
  check_closed_surfaces(mesh, surfaces, band);
  double absorption_area = 0.0;
  double area = 0.0;
  for (std::size_t i = 0; i < mesh.size(); ++i) {
    const double a = geom::triangle_area(mesh.triangle(i));
    area += a;
    absorption_area += a * surfaces[mesh.triangle_material[i]].absorption[static_cast<std::size_t>(band)];
  }
  const double mean_alpha = absorption_area / area;
  if (mean_alpha <= 0.0) throw Error("zero absorption area");
  if (mean_alpha >= 1.0) return 0.0;
  return 0.161 * scene::enclosed_volume(mesh) / (-area * std::log(1.0 - mean_alpha));
}

}  // namespace roomir::ga
