#include <benchmark/benchmark.h>

#include <random>

#include "segnmt/segmentation.hpp"

namespace {

using namespace segnmt;

SpanScores random_scores(int n, int cap) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5.0, 0.0);
  SpanScores s(n);
  for (int i = 1; i <= n; ++i)
    for (int j = i; j <= n && j - i + 1 <= cap; ++j) s.set(i, j, u(rng));
  return s;
}

void BM_OptimalSegmentation(benchmark::State& state) {
  auto s = random_scores(static_cast<int>(state.range(0)), static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(optimal_segmentation(s));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_OptimalSegmentation)->RangeMultiplier(2)->Range(8, 256)->Complexity(benchmark::oNSquared);

void BM_BruteForceSegmentation(benchmark::State& state) {
  auto s = random_scores(static_cast<int>(state.range(0)), static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(brute_force_segmentation(s));
}
BENCHMARK(BM_BruteForceSegmentation)->DenseRange(4, 16, 4);

}  // namespace
