#include <benchmark/benchmark.h>

#include "fracperim/functionals.hpp"
#include "fracperim/minimization.hpp"

using namespace fracperim;

static void BM_WeightTable2D(benchmark::State& state) {
  const Grid g = Grid::uniform(Domain::unit_cube(2), static_cast<int>(state.range(0)));
  WeightOptions opt;
  opt.near_cutoff = 2;
  for (auto _ : state) {
    const WeightTable t = make_weight_table(g, FractionalOrder(0.7), opt);
    benchmark::DoNotOptimize(t.dense({g.extent(0) - 1, g.extent(1) - 1, 0}));
  }
}
BENCHMARK(BM_WeightTable2D)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_PairCounts2D(benchmark::State& state) {
  const Grid g = Grid::uniform(Domain::unit_cube(2), static_cast<int>(state.range(0)));
  const IndicatorField e = rasterize(AnalyticSet::ball({0.0, 0.0, 0.0}, 0.3), g);
  const IndicatorField c = e.complement();
  for (auto _ : state) benchmark::DoNotOptimize(pair_counts(g, e.bits(), c.bits()));
}
BENCHMARK(BM_PairCounts2D)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

static void BM_J1Halfspace2D(benchmark::State& state) {
  const Domain q = Domain::unit_cube(2);
  const IndicatorField e = rasterize(AnalyticSet::lower_halfspace(2), Grid::uniform(q, static_cast<int>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(j1(e, q, FractionalOrder(0.9)));
}
BENCHMARK(BM_J1Halfspace2D)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

static void BM_BruteForce1D(benchmark::State& state) {
  const Domain q = Domain::unit_cube(1);
  const Grid g = Grid::uniform(q, static_cast<int>(state.range(0)), 8);
  for (auto _ : state)
    benchmark::DoNotOptimize(brute_force_minimizer(AnalyticSet::lower_halfspace(1), g, q, FractionalOrder(0.5)));
}
BENCHMARK(BM_BruteForce1D)->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
