#include <benchmark/benchmark.h>

#include "coarseop/approx.hpp"

using namespace coarseop;

namespace {

SpacePtr grid_space(int dim, int side) {
  static std::map<std::pair<int, int>, SpacePtr> cache;
  auto& slot = cache[{dim, side}];
  if (!slot) slot = std::make_shared<MetricSpace>(MetricSpace::grid(dim, side));
  return slot;
}

void BM_opnorm_p2(benchmark::State& state) {
  auto s = grid_space(1, static_cast<int>(state.range(0)));
  LpOperator b = random_band(s, 2, 1, 2.0, 0.8, 1.0, 1);
  for (auto _ : state) benchmark::DoNotOptimize(opnorm(b).upper);
}
BENCHMARK(BM_opnorm_p2)->Arg(100)->Arg(400);

void BM_opnorm_p1(benchmark::State& state) {
  auto s = grid_space(1, static_cast<int>(state.range(0)));
  LpOperator b = random_band(s, 1, 1, 2.0, 0.8, 1.0, 1);
  for (auto _ : state) benchmark::DoNotOptimize(opnorm(b).upper);
}
BENCHMARK(BM_opnorm_p1)->Arg(100)->Arg(400);

void BM_band_decompose(benchmark::State& state) {
  auto s = grid_space(2, static_cast<int>(state.range(0)));
  LpOperator b = random_band(s, 2, 1, 2.0, 0.8, 1.0, 2);
  for (auto _ : state) benchmark::DoNotOptimize(band_decompose(b).parts.size());
}
BENCHMARK(BM_band_decompose)->Arg(10)->Arg(20);

void BM_eps_propagation(benchmark::State& state) {
  auto s = grid_space(1, static_cast<int>(state.range(0)));
  LpOperator b = random_band(s, 1, 1, 4.0, 0.7, 1.0, 3);
  for (auto _ : state) benchmark::DoNotOptimize(eps_propagation(b, 2.0, EpsPropMode::bounds).upper);
}
BENCHMARK(BM_eps_propagation)->Arg(100)->Arg(200);

void BM_folner_variation(benchmark::State& state) {
  auto s = grid_space(2, 30);
  PartitionOfUnity pou = grid_folner_pou(*s, static_cast<int>(state.range(0)), 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(variation(*s, pou, 1.0));
}
BENCHMARK(BM_folner_variation)->Arg(5)->Arg(15);

}  // namespace

BENCHMARK_MAIN();
