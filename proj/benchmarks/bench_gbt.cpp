#include <benchmark/benchmark.h>

#include <vector>

#include <boostrpf/datagen.hpp>
#include <boostrpf/gbt.hpp>
#include <boostrpf/paths.hpp>
#include <boostrpf/sequential.hpp>

namespace {

using namespace boostrpf;

GridDataset make_dataset(int n_buses, int n_samples) {
  GridGenConfig g;
  g.n_buses = n_buses;
  g.seed = 5;
  RadialGrid grid = gen_grid(g);
  auto samples = build_dataset(grid, ScenarioGenConfig{}, n_samples);
  return {std::move(grid), std::move(samples)};
}

GbtParams small_params(int rounds) {
  GbtParams p;
  p.n_estimators = rounds;
  p.seed = 1;
  return p;
}

// Training rows come from one 116-bus grid; the argument is the scenario count.
void BM_Fit(benchmark::State& state) {
  const std::vector<GridDataset> data{make_dataset(116, static_cast<int>(state.range(0)))};
  const EdgeTable t = build_edge_table(data, Variant::ParentResidual);
  const GbtParams p = small_params(20);
  for (auto _ : state) benchmark::DoNotOptimize(fit(t.features, t.targets, p));
  state.counters["rows"] = static_cast<double>(t.features.rows());
}

void BM_Infer(benchmark::State& state) {
  const std::vector<GridDataset> train_data{make_dataset(116, 20)};
  const TrainedPredictor predictor = train(train_data, Variant::ParentResidual, small_params(50));
  GridGenConfig g;
  g.n_buses = static_cast<int>(state.range(0));
  g.seed = 9;
  const RadialGrid grid = gen_grid(g);
  const Orientation o = orient(grid);
  const Scenario s = gen_scenario(grid, ScenarioGenConfig{}, 0);
  for (auto _ : state) benchmark::DoNotOptimize(infer(grid, o, s, predictor));
  state.SetComplexityN(state.range(0));
}

}  // namespace

BENCHMARK(BM_Fit)->Arg(10)->Arg(40)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Infer)->RangeMultiplier(2)->Range(16, 512)->Unit(benchmark::kMicrosecond)->Complexity(benchmark::oN);
