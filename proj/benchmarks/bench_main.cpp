#include <benchmark/benchmark.h>

#include "aoi/analytic.hpp"
#include "aoi/chain.hpp"
#include "aoi/sim.hpp"

namespace {

using namespace aoi;

const SystemParams kRef(0.2, 1.0 / 3.0);

void BM_AnalyticSize1Pmf(benchmark::State& state) {
  for (auto _ : state) {
    Pmf pmf = ber_geo11_aoi_pmf(kRef, static_cast<int>(state.range(0)));
    benchmark::DoNotOptimize(pmf.probs.data());
  }
}
BENCHMARK(BM_AnalyticSize1Pmf)->Arg(50)->Arg(512);

void BM_AnalyticReplacementPmf(benchmark::State& state) {
  for (auto _ : state) {
    Pmf pmf = ber_geo12star_aoi_pmf(kRef, static_cast<int>(state.range(0)));
    benchmark::DoNotOptimize(pmf.probs.data());
  }
}
BENCHMARK(BM_AnalyticReplacementPmf)->Arg(512);

void BM_ChainSolveDim2(benchmark::State& state) {
  TransitionKernel kernel(ModelSpec::ber_geo11(kRef), static_cast<int>(state.range(0)));
  for (auto _ : state) {
    StationaryTable t = solve_stationary(kernel);
    benchmark::DoNotOptimize(t.probs.data());
  }
}
BENCHMARK(BM_ChainSolveDim2)->Arg(300)->Arg(600)->Unit(benchmark::kMillisecond);

void BM_ChainSolveDim3(benchmark::State& state) {
  TransitionKernel kernel(ModelSpec::ber_geo12(kRef), static_cast<int>(state.range(0)),
                          40'000'000);
  for (auto _ : state) {
    StationaryTable t = solve_stationary(kernel);
    benchmark::DoNotOptimize(t.probs.data());
  }
}
BENCHMARK(BM_ChainSolveDim3)->Arg(150)->Arg(300)->Unit(benchmark::kMillisecond);

void BM_SimulateSlots(benchmark::State& state) {
  SimConfig cfg(ModelSpec::ber_geo12_star(kRef));
  cfg.slots = state.range(0);
  cfg.warmup_slots = 1000;
  cfg.seed = 17;
  for (auto _ : state) {
    SimStats stats = run(cfg);
    benchmark::DoNotOptimize(stats.mean_aoi);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulateSlots)->Arg(1'000'000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
