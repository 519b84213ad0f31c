// Serial reference vs OpenMP kernels: one scenario (per-upstream allocation
// and per-bidder revision in parallel) and a seed sweep (whole runs in
// parallel).

#include <benchmark/benchmark.h>

#include "layercast/simulation.hpp"
#include "layercast/sweep.hpp"

using namespace layercast;

namespace {

Execution execution_of(const benchmark::State& state) {
  return state.range(1) == 0 ? Execution::serial : Execution::parallel;
}

void BM_Scenario(benchmark::State& state) {
  ScenarioConfig c;
  c.n_downstream = static_cast<int>(state.range(0));
  c.n_upstream = c.n_downstream / 2;
  const Overlay ov = generate_overlay(c, 1);
  SimParams params;
  params.execution = execution_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(run_scenario(ov, params));
  state.SetLabel(params.execution == Execution::serial ? "serial" : "parallel");
}

void BM_Baseline(benchmark::State& state) {
  ScenarioConfig c;
  c.n_downstream = static_cast<int>(state.range(0));
  c.n_upstream = c.n_downstream / 2;
  const Overlay ov = generate_overlay(c, 1);
  SimParams params;
  params.execution = execution_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(run_baseline(ov, params));
  state.SetLabel(params.execution == Execution::serial ? "serial" : "parallel");
}

void BM_Sweep(benchmark::State& state) {
  ScenarioConfig c;
  c.seeds = {1, static_cast<std::uint64_t>(state.range(0))};
  const auto specs = expand_runs(c);
  const auto ex = execution_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(run_sweep(specs, ex));
  state.SetLabel(ex == Execution::serial ? "serial" : "parallel");
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(specs.size()));
}

}  // namespace

BENCHMARK(BM_Scenario)->ArgsProduct({{500, 2000}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Baseline)->ArgsProduct({{500, 2000}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Sweep)->ArgsProduct({{8}, {0, 1}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
