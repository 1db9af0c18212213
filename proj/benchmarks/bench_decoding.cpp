#include <benchmark/benchmark.h>

#include "segnmt/confidence.hpp"
#include "segnmt/decoding.hpp"

namespace {

using namespace segnmt;

GruEncDecParams bench_model(std::size_t vocab) {
  return GruEncDecParams::uniform({32, 64, vocab, vocab}, 0.1, 7);
}

Sentence bench_sentence(std::size_t n, std::size_t vocab) {
  Sentence s;
  for (std::size_t k = 0; k < n; ++k) s.push_back(static_cast<TokenId>(3 + (k * 7) % (vocab - 3)));
  return s;
}

void BM_BeamSearch(benchmark::State& state) {
  const auto width = static_cast<std::size_t>(state.range(0));
  auto p = bench_model(200);
  auto src = bench_sentence(8, 200);
  for (auto _ : state) benchmark::DoNotOptimize(beam_search(p, src, width, 12));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_BeamSearch)->Arg(1)->Arg(5)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_ConfidenceMatrix(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  auto fwd = bench_model(200);
  auto rev = bench_model(200);
  auto src = bench_sentence(n, 200);
  MatrixOptions o;
  o.width = 5;
  for (auto _ : state) benchmark::DoNotOptimize(build_confidence_matrix(fwd, &rev, src, o));
}
BENCHMARK(BM_ConfidenceMatrix)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
