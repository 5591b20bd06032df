#include <doctest.h>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <numeric>
#include <set>
#include <thread>

#include "roomir/pipeline.hpp"
#include "roomir/wav.hpp"
#include "support.hpp"

using namespace roomir;
using namespace roomir::pipeline;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void put_u16(std::string& s, std::uint16_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>(v >> 8));
}
void put_u32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

// Canonical PCM16 mono file assembled byte by byte.
std::string pcm16_wav(const std::vector<std::int16_t>& samples, std::uint32_t rate) {
  std::string s = "RIFF";
  put_u32(s, static_cast<std::uint32_t>(36 + 2 * samples.size()));
  s += "WAVEfmt ";
  put_u32(s, 16);
  put_u16(s, 1);
  put_u16(s, 1);
  put_u32(s, rate);
  put_u32(s, rate * 2);
  put_u16(s, 2);
  put_u16(s, 16);
  s += "data";
  put_u32(s, static_cast<std::uint32_t>(2 * samples.size()));
  for (auto v : samples) put_u16(s, static_cast<std::uint16_t>(v));
  return s;
}

PipelineConfig desk_config(const fs::path& out) {
  auto cfg = PipelineConfig::load(roomir::test::data_dir() / "desk_config.json");
  cfg.output_dir = out;
  return cfg;
}

class EnvGuard {
 public:
  EnvGuard(const char* name, const char* value) : name_(name) { ::setenv(name, value, 1); }
  ~EnvGuard() { ::unsetenv(name_); }
  EnvGuard(const EnvGuard&) = delete;
  EnvGuard& operator=(const EnvGuard&) = delete;

 private:
  const char* name_;
};

}  // namespace

TEST_CASE("WAV round trip") {
  roomir::test::TempDir dir("wav");
  ImpulseResponse ir;
  ir.sample_rate = 48000.0;
  ir.samples.resize(48000);
  const auto noise = roomir::test::white_noise(48000, 1);
  for (std::size_t i = 0; i < noise.size(); ++i) ir.samples[i] = static_cast<float>(0.1 * noise[i]);
  const auto path = dir.path() / "x.wav";
  wav::write(ir, path);
  CHECK(fs::file_size(path) == 44 + 4 * 48000);
  const auto back = wav::read(path);
  CHECK(back.sample_rate == 48000.0);
  CHECK(back.samples == ir.samples);

  const auto bytes = slurp(path);
  CHECK(bytes.substr(0, 4) == "RIFF");
  CHECK(bytes.substr(8, 8) == "WAVEfmt ");
  CHECK(bytes.substr(36, 4) == "data");

  ImpulseResponse empty;
  empty.sample_rate = 48000.0;
  CHECK_THROWS_AS(wav::write(empty, dir.path() / "e.wav"), Error);
  ir.sample_rate = 44100.5;
  CHECK_THROWS_AS(wav::write(ir, dir.path() / "f.wav"), Error);
}

TEST_CASE("WAV reader accepts PCM16") {
  roomir::test::TempDir dir("pcm");
  const auto path = dir.path() / "p.wav";
  std::ofstream(path, std::ios::binary) << pcm16_wav({0, 16384, -32768, 32767}, 16000);
  const auto ir = wav::read(path);
  CHECK(ir.sample_rate == 16000.0);
  REQUIRE(ir.size() == 4);
  CHECK(ir.samples[0] == 0.0);
  CHECK(ir.samples[1] == 0.5);
  CHECK(ir.samples[2] == -1.0);
  CHECK(ir.samples[3] == doctest::Approx(32767.0 / 32768.0));

  std::ofstream(dir.path() / "bad.wav", std::ios::binary) << "RIFX nonsense";
  CHECK_THROWS_AS(wav::read(dir.path() / "bad.wav"), Error);
  CHECK_THROWS_AS(wav::read(dir.path() / "missing.wav"), Error);
}

TEST_CASE("config parsing") {
  const auto base = roomir::test::data_dir();
  const auto cfg = PipelineConfig::load(base / "desk_config.json");
  CHECK(cfg.fdtd.f_max == 350.0);
  CHECK(cfg.crossover.crossover_freq == 350.0);
  CHECK(cfg.ga.ray_count == 4000);
  CHECK(cfg.pair_cap == 2);
  CHECK(cfg.scenes.front() == base / "shoebox.obj");
  CHECK_NOTHROW(cfg.validate());

  const auto defaults = PipelineConfig::from_json("{}");
  CHECK(defaults.fdtd.f_max == 1400.0);
  CHECK(defaults.crossover.crossover_freq == 1400.0);
  CHECK(defaults.sample_rate == 48000.0);
  CHECK_THROWS_AS(defaults.validate(), Error);

  CHECK_THROWS_AS(PipelineConfig::from_json(R"({"profile": "huge"})"), Error);
  CHECK_THROWS_AS(PipelineConfig::from_json(R"({"bogus": 1})"), Error);
  CHECK_THROWS_AS(PipelineConfig::from_json(R"({"ga": {"rays": 3}})"), Error);
  CHECK_THROWS_AS(PipelineConfig::from_json(R"({"sample_rate": "fast"})"), Error);
  CHECK_THROWS_AS(PipelineConfig::from_json("{"), Error);

  auto low_rate = cfg;
  low_rate.sample_rate = 16000.0;
  CHECK_THROWS_AS(low_rate.validate(), Error);

  const auto again = PipelineConfig::from_json(cfg.to_json());
  CHECK(again.to_json() == cfg.to_json());
  CHECK(again.calibration_key() == cfg.calibration_key());
  auto changed = cfg;
  changed.fdtd.f_max = 400.0;
  CHECK(changed.calibration_key() != cfg.calibration_key());
  changed = cfg;
  changed.rng_seed = 99;
  CHECK(changed.calibration_key() == cfg.calibration_key());
}

TEST_CASE("environment overrides") {
  auto cfg = desk_config("unused");
  {
    EnvGuard a("ROOMIR_OUTPUT_DIR", "/tmp/elsewhere");
    EnvGuard b("ROOMIR_JOBS", "3");
    apply_env_overrides(cfg);
  }
  CHECK(cfg.output_dir == "/tmp/elsewhere");
  CHECK(cfg.max_parallel == 3);
  EnvGuard bad("ROOMIR_JOBS", "many");
  CHECK_THROWS_AS(apply_env_overrides(cfg), Error);
}

TEST_CASE("scheduler") {
  SUBCASE("a failing job does not stop the others") {
    std::vector<std::function<int()>> jobs;
    for (int i = 0; i < 10; ++i) {
      jobs.emplace_back([i]() -> int {
        if (i == 4) throw Error("poisoned");
        return i * i;
      });
    }
    for (int workers : {1, 3}) {
      const auto out = schedule(jobs, workers);
      REQUIRE(out.size() == 10);
      for (int i = 0; i < 10; ++i) {
        if (i == 4) {
          CHECK_FALSE(out[4].value.has_value());
          CHECK(out[4].error == "poisoned");
        } else {
          CHECK(*out[static_cast<std::size_t>(i)].value == i * i);
        }
      }
    }
  }

  SUBCASE("results do not depend on the worker count") {
    std::vector<std::function<double()>> jobs;
    for (int i = 0; i < 16; ++i) {
      jobs.emplace_back([i] {
        const auto v = roomir::test::white_noise(1000, static_cast<std::uint64_t>(i));
        return std::accumulate(v.begin(), v.end(), 0.0);
      });
    }
    const auto one = schedule(jobs, 1);
    const auto eight = schedule(jobs, 8);
    for (std::size_t i = 0; i < jobs.size(); ++i) CHECK(*one[i].value == *eight[i].value);
    CHECK_THROWS_AS(schedule(jobs, 0), Error);
  }

  SUBCASE("parallel speedup") {
    if (std::thread::hardware_concurrency() < 4) {
      MESSAGE("fewer than 4 hardware threads; speedup check skipped");
      return;
    }
    std::vector<std::function<int()>> jobs(8, [] {
      volatile double acc = 0.0;
      for (int k = 0; k < 20'000'000; ++k) acc = acc + 1e-9 * k;
      return 0;
    });
    auto time = [&](int workers) {
      const auto t0 = std::chrono::steady_clock::now();
      schedule(jobs, workers);
      return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };
    CHECK(time(1) / time(4) > 2.0);
  }
}

TEST_CASE("planning lists the capped pairs") {
  roomir::test::TempDir dir("plan");
  const auto cfg = desk_config(dir.path());
  const auto planned = plan(cfg);
  REQUIRE(planned.size() == 2);
  for (const auto& e : planned) {
    CHECK(e.ok());
    CHECK(e.scene_id == "shoebox");
    CHECK(e.distance == doctest::Approx(distance(e.source, e.receiver)));
  }
  CHECK(planned[0].pair_index < planned[1].pair_index);
  CHECK(plan(cfg).front().source == planned.front().source);

  auto broken = cfg;
  broken.clearance = 5.0;
  const auto failed = plan(broken);
  REQUIRE(failed.size() == 1);
  CHECK_FALSE(failed[0].ok());
}

TEST_CASE("end-to-end generation is complete and reproducible") {
  roomir::test::TempDir first("e2e_a");
  roomir::test::TempDir second("e2e_b");
  const auto a = run_pipeline(desk_config(first.path()));
  CHECK_FALSE(a.calibration_from_cache);
  CHECK(a.failed == 0);
  REQUIRE(a.manifest.size() == 2);
  CHECK(a.manifest_path == first.path() / "manifest.json");

  std::set<std::string> labels;
  for (const auto& e : a.manifest) {
    CHECK(e.ok());
    for (const auto* rel : {&e.ga_wav, &e.fdtd_wav, &e.hybrid_wav}) {
      REQUIRE_FALSE(rel->empty());
      CHECK(fs::path(*rel).is_relative());
      const auto ir = wav::read(first.path() / *rel);
      CHECK(ir.sample_rate == 48000.0);
      CHECK(ir.size() > 0);
    }
    CHECK(e.distance == doctest::Approx(distance(e.source, e.receiver)));
    CHECK(e.scene_volume == doctest::Approx(30.0));
    CHECK(e.eta_combined == doctest::Approx(e.eta_w / e.eta_g));
    CHECK(e.peak_gain > 0.0);
    CHECK(e.rt60 > 0.0);
    CHECK_FALSE(e.materials.empty());
    for (const auto& m : e.materials) labels.insert(m.label);
  }
  CHECK(labels == std::set<std::string>{"ceiling", "floor", "wall"});

  const auto loaded = load_manifest(a.manifest_path);
  CHECK(manifest_to_json(loaded) == slurp(a.manifest_path));

  // Fresh output directory: calibration and every IR are recomputed bit for bit.
  const auto b = run_pipeline(desk_config(second.path()));
  CHECK(slurp(first.path() / "manifest.json") == slurp(second.path() / "manifest.json"));
  for (const auto& e : a.manifest) {
    for (const auto* rel : {&e.ga_wav, &e.fdtd_wav, &e.hybrid_wav}) {
      CHECK(slurp(first.path() / *rel) == slurp(second.path() / *rel));
    }
  }

  // Same directory again: the calibration comes from the cache.
  const auto c = run_pipeline(desk_config(first.path()));
  CHECK(c.calibration_from_cache);
  CHECK(c.calibration.eta_combined == a.calibration.eta_combined);
  CHECK(slurp(first.path() / "manifest.json") == slurp(second.path() / "manifest.json"));
}

TEST_CASE("FDTD impulse response keeps its scale across output rates") {
  auto cfg = desk_config("unused");
  const auto mesh = scene::make_box({0, 0, 0}, {3, 2.5, 2});
  scene::VoxelizeOptions opt;
  opt.material_admittance = {0.2};
  const auto grid = scene::voxelize(mesh, fdtd::derive_grid_params(cfg.fdtd).dx, opt);
  cfg.fdtd.duration = 0.3;
  const auto hi = fdtd_impulse_response(grid, {1, 1, 1}, {2, 1.5, 1.2}, cfg.fdtd, 48000.0);
  const auto lo = fdtd_impulse_response(grid, {1, 1, 1}, {2, 1.5, 1.2}, cfg.fdtd, 24000.0);
  CHECK(hi.sample_rate == 48000.0);
  CHECK(lo.sample_rate == 24000.0);
  // Energy per unit time of a band-limited response is rate independent once scaled by 1 / fs.
  CHECK(dsp::energy(hi.samples) / 48000.0 == doctest::Approx(dsp::energy(lo.samples) / 24000.0).epsilon(0.02));
}
