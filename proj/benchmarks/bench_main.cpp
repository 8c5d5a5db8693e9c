#include <benchmark/benchmark.h>

#include "rggm/graph.hpp"
#include "rggm/linalg.hpp"
#include "rggm/oracle.hpp"
#include "rggm/sampler.hpp"

namespace {

rggm::Topology ring(int m) { return rggm::make_cycle(m); }

// flip one edge on and off again with the rank-1 path
void BM_RankOneFlip(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  auto cs = rggm::CovarianceState::empty(m, 1.0, 0);
  for (auto _ : state) {
    cs.add_edge(0, m / 2, 1.0);
    cs.remove_edge(0, m / 2, 1.0);
    benchmark::DoNotOptimize(cs.logdet_sigma());
  }
  state.SetItemsProcessed(2 * state.iterations());
}
BENCHMARK(BM_RankOneFlip)->RangeMultiplier(2)->Range(16, 256);

// the same two flips, refactoring from scratch each time
void BM_CholeskyRebuild(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const auto top = ring(m);
  const rggm::ModelParams p{1.0, 1.0};
  auto a = rggm::EdgeConfig(top.edge_count());
  for (auto _ : state) {
    a.flip(0);
    auto cs = rggm::covariance_for(top, a, p);
    benchmark::DoNotOptimize(cs.logdet_sigma());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_CholeskyRebuild)->RangeMultiplier(2)->Range(16, 256);

void BM_EdgeSweep(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const auto top = ring(m);
  const rggm::ModelParams p{1.0, 1.0};
  auto chain = rggm::init_chain(top, p, 7);
  for (auto _ : state) rggm::edge_sweep(chain, top, p);
  state.SetItemsProcessed(state.iterations() * static_cast<long>(top.edge_count()));
}
BENCHMARK(BM_EdgeSweep)->RangeMultiplier(2)->Range(16, 128);

void BM_CoupledStep(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const auto top = ring(m);
  const rggm::ModelParams p{1.0, 1.0};
  auto chain = rggm::init_chain(top, p, 7);
  for (auto _ : state) rggm::coupled_step(chain, top, p);
}
BENCHMARK(BM_CoupledStep)->RangeMultiplier(2)->Range(16, 128);

void BM_Enumerate(benchmark::State& state) {
  const auto top = rggm::make_path(static_cast<int>(state.range(0)) + 1);
  rggm::EnumerateOptions opts;
  opts.gray_code = state.range(1) != 0;
  for (auto _ : state) {
    auto table = rggm::enumerate(top, {1.0, 1.0}, opts);
    benchmark::DoNotOptimize(table.log_kappa);
  }
}
BENCHMARK(BM_Enumerate)->ArgsProduct({{8, 12, 16}, {0, 1}})->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
