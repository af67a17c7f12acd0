#include <benchmark/benchmark.h>

#include <vector>

#include "moc/feature_stats.hpp"
#include "moc/random.hpp"

namespace {

moc::FeatureMapStack make_stack(int views, int side) {
  moc::CounterRng rng(3);
  std::vector<moc::FeatureMap> maps;
  std::vector<double> az;
  for (int v = 0; v < views; ++v) {
    maps.emplace_back(moc::random_normal(rng, 4 * side, side));
    az.push_back(360.0 * v / views);
  }
  return moc::FeatureMapStack(std::move(maps), std::move(az));
}

// Args: views, map side.
void BM_BuildDescriptor(benchmark::State& state) {
  const moc::FeatureMapStack stack = make_stack(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  const auto w = moc::LuminanceWeights::equal();
  for (auto _ : state) benchmark::DoNotOptimize(moc::build_descriptor(stack, w, moc::kDefaultPatch, 1e-6));
}
BENCHMARK(BM_BuildDescriptor)->Args({5, 8})->Args({5, 64})->Args({16, 64});

}  // namespace
