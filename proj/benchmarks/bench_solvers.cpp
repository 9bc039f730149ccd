#include <benchmark/benchmark.h>

#include <boostrpf/analytical.hpp>
#include <boostrpf/datagen.hpp>
#include <boostrpf/paths.hpp>

namespace {

using namespace boostrpf;

struct Case {
  RadialGrid grid;
  Orientation orientation;
  Scenario scenario;
};

Case make_case(int n_buses) {
  GridGenConfig g;
  g.n_buses = n_buses;
  g.seed = 11;
  RadialGrid grid = gen_grid(g);
  Orientation o = orient(grid);
  Scenario s = gen_scenario(grid, ScenarioGenConfig{}, 0);
  return {std::move(grid), std::move(o), std::move(s)};
}

void BM_LinDistFlow(benchmark::State& state) {
  const Case c = make_case(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(lindistflow_solve(c.grid, c.orientation, c.scenario));
  state.SetComplexityN(state.range(0));
}

void BM_DistFlow(benchmark::State& state) {
  const Case c = make_case(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(distflow_solve(c.grid, c.orientation, c.scenario));
  state.SetComplexityN(state.range(0));
}

void BM_AcOracle(benchmark::State& state) {
  const Case c = make_case(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(ac_oracle_solve(c.grid, c.orientation, c.scenario));
  state.SetComplexityN(state.range(0));
}

void BM_Orient(benchmark::State& state) {
  const Case c = make_case(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(orient(c.grid));
  state.SetComplexityN(state.range(0));
}

}  // namespace

BENCHMARK(BM_LinDistFlow)->RangeMultiplier(2)->Range(16, 1024)->Complexity(benchmark::oN);
BENCHMARK(BM_DistFlow)->RangeMultiplier(2)->Range(16, 1024)->Complexity(benchmark::oN);
BENCHMARK(BM_AcOracle)->RangeMultiplier(2)->Range(16, 1024)->Complexity(benchmark::oN);
BENCHMARK(BM_Orient)->RangeMultiplier(2)->Range(16, 1024)->Complexity(benchmark::oN);
