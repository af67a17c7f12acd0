#include <benchmark/benchmark.h>

#include "moc/harness.hpp"

namespace {

void BM_HarnessEvaluate(benchmark::State& state) {
  const moc::HarnessConfig cfg;
  const moc::SceneModel model = moc::make_scene(cfg);
  const moc::SceneParams p = moc::initial_params(model, cfg);
  for (auto _ : state) benchmark::DoNotOptimize(moc::evaluate(model, p, 500, cfg.schedule));
}
BENCHMARK(BM_HarnessEvaluate);

void BM_HarnessFullRun(benchmark::State& state) {
  const moc::HarnessConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(moc::run_optimization(cfg));
}
BENCHMARK(BM_HarnessFullRun)->Unit(benchmark::kMillisecond)->Iterations(3);

}  // namespace
