#include <benchmark/benchmark.h>

#include <random>

#include "tsv/geometry.hpp"
#include "tsv/locator.hpp"
#include "tsv/mesh.hpp"
#include "tsv/seeding.hpp"
#include "tsv/tensor.hpp"
#include "tsv/tracer.hpp"

namespace {

tsv::HexMesh beam(int n) {
  tsv::CartesianLayout layout;
  layout.dims = {2 * n + 1, n + 1, n + 1};
  layout.origin = {0, 0, 0};
  layout.spacing = {2.0 / (2 * n), 1.0 / n, 1.0 / n};
  std::vector<tsv::StressTensor> tensors;
  for (int k = 0; k <= n; ++k) {
    for (int j = 0; j <= n; ++j) {
      for (int i = 0; i <= 2 * n; ++i) {
        const double x = i * layout.spacing.x;
        const double y = j * layout.spacing.y - 0.5;
        tensors.push_back({(2.0 - x) * y * 6.0, 0.1 * y, -5.0, 1.5 * (0.25 - y * y), 0.0, 0.0});
      }
    }
  }
  return tsv::HexMesh::cartesian(layout, std::move(tensors));
}

void BM_Decompose(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<tsv::StressTensor> ts(1024);
  for (auto& t : ts) t = {u(rng), u(rng), u(rng), u(rng), u(rng), u(rng)};
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(tsv::decompose(ts[i++ & 1023]));
}
BENCHMARK(BM_Decompose);

void BM_Locate(benchmark::State& state) {
  const auto mesh = beam(static_cast<int>(state.range(0)));
  const tsv::CellLocator locator(mesh);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> ux(-0.1, 2.1), uy(-0.1, 1.1);
  std::vector<tsv::Vec3> pts(4096);
  for (auto& p : pts) p = {ux(rng), uy(rng), uy(rng)};
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(locator.locate(pts[i++ & 4095]));
}
BENCHMARK(BM_Locate)->Arg(8)->Arg(32);

void BM_Trace(benchmark::State& state) {
  const auto mesh = beam(16);
  const tsv::CellLocator locator(mesh);
  const auto cfg = tsv::default_trace_config(mesh);
  for (auto _ : state) {
    benchmark::DoNotOptimize(tsv::trace_psl(locator, {1.0, 0.3, 0.5}, tsv::PslType::major, cfg));
  }
}
BENCHMARK(BM_Trace)->Unit(benchmark::kMicrosecond);

void BM_Seeding(benchmark::State& state) {
  const auto mesh = beam(10);
  const tsv::CellLocator locator(mesh);
  tsv::SeedingConfig cfg;
  cfg.eps_rel = {0.2, 0.2, 0.2};
  cfg.levels = static_cast<int>(state.range(0));
  cfg.trace = tsv::default_trace_config(mesh);
  for (auto _ : state) benchmark::DoNotOptimize(tsv::build_lod(locator, cfg));
}
BENCHMARK(BM_Seeding)->Arg(1)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_Silhouette(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-10, 10);
  std::vector<tsv::Vec2> cams;
  while (cams.size() < 1024) {
    const tsv::Vec2 c{u(rng), u(rng)};
    if (c[0] * c[0] / 0.25 + c[1] * c[1] > 1.5) cams.push_back(c);
  }
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(tsv::silhouette_tangent_points(cams[i++ & 1023], 0.5));
}
BENCHMARK(BM_Silhouette);

}  // namespace
BENCHMARK_MAIN();
