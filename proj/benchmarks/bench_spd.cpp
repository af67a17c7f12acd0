#include <benchmark/benchmark.h>

#include "moc/random.hpp"
#include "moc/spd_geometry.hpp"

namespace {

void BM_LemDistanceSq(benchmark::State& state) {
  moc::CounterRng rng(1);
  const auto dim = static_cast<Eigen::Index>(state.range(0));
  const moc::SpdMatrix a(moc::random_spd(rng, dim, 1e2));
  const moc::SpdMatrix b(moc::random_spd(rng, dim, 1e2));
  for (auto _ : state) benchmark::DoNotOptimize(moc::lem_distance_sq(a, b, 1e-6));
}
BENCHMARK(BM_LemDistanceSq)->Arg(4)->Arg(17)->Arg(65);

void BM_GradRSpd(benchmark::State& state) {
  moc::CounterRng rng(2);
  const auto dim = static_cast<Eigen::Index>(state.range(0));
  const moc::SpdMatrix a(moc::random_spd(rng, dim, 1e2));
  const moc::SpdMatrix b(moc::random_spd(rng, dim, 1e2));
  for (auto _ : state) benchmark::DoNotOptimize(moc::grad_r_spd(a, b, 1e-6));
}
BENCHMARK(BM_GradRSpd)->Arg(4)->Arg(17)->Arg(65);

}  // namespace
