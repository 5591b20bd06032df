#include <benchmark/benchmark.h>

#include <vector>

#include "roomir/fdtd.hpp"
#include "roomir/ga.hpp"
#include "roomir/scene.hpp"

using namespace roomir;

namespace {

scene::TriangleMesh shoebox() { return scene::make_box({0, 0, 0}, {5, 4, 3}); }

void BM_Voxelize(benchmark::State& state) {
  const auto mesh = shoebox();
  const double dx = 1.0 / static_cast<double>(state.range(0));
  for (auto _ : state) {
    auto grid = scene::voxelize(mesh, dx);
    benchmark::DoNotOptimize(grid);
  }
  state.SetLabel("cells per metre " + std::to_string(state.range(0)));
}
BENCHMARK(BM_Voxelize)->Arg(10)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

// One leapfrog update of the whole grid; reported as cell updates per second.
void BM_FdtdStep(benchmark::State& state) {
  fdtd::FdtdConfig cfg;
  cfg.f_max = static_cast<double>(state.range(0));
  scene::VoxelizeOptions opts;
  opts.material_admittance = {0.1};
  const auto grid = scene::voxelize(shoebox(), fdtd::derive_grid_params(cfg).dx, opts);
  fdtd::Simulation sim(grid, cfg);
  sim.add_pressure(sim.air_cell({2.0, 2.0, 1.5}, "source"), 1.0);
  for (auto _ : state) sim.step();
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(grid.cell_count()));
}
BENCHMARK(BM_FdtdStep)->Arg(350)->Arg(700)->Unit(benchmark::kMillisecond);

void BM_GaTrace(benchmark::State& state) {
  const auto mesh = shoebox();
  ga::Surface s;
  s.absorption.fill(0.2);
  s.scattering.fill(0.3);
  const std::vector<ga::Surface> surfaces{s};
  ga::GaConfig cfg;
  cfg.ray_count = static_cast<int>(state.range(0));
  cfg.duration = 0.5;
  cfg.threads = 1;
  for (auto _ : state) {
    auto h = ga::trace(mesh, surfaces, {1.0, 1.0, 1.2}, {3.5, 2.5, 1.6}, cfg);
    benchmark::DoNotOptimize(h);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GaTrace)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
