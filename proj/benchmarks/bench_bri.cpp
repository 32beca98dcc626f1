#include <benchmark/benchmark.h>

#include "bri/baseline_lu.hpp"
#include "bri/engine.hpp"
#include "bri/random.hpp"

namespace {

bri::Block random_block(std::size_t b, std::uint64_t seed) {
  const bri::DenseMatrix m = bri::random_normal_matrix(b, seed, static_cast<double>(b));
  return bri::Block(b, m.data());
}

void BM_BlockMultiply(benchmark::State& state) {
  const auto b = static_cast<std::size_t>(state.range(0));
  const bri::Block x = random_block(b, 1);
  const bri::Block y = random_block(b, 2);
  for (auto _ : state) benchmark::DoNotOptimize(bri::multiply(x, y));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(2 * b * b * b));
}
BENCHMARK(BM_BlockMultiply)->RangeMultiplier(2)->Range(8, 256);

void BM_BlockInvert(benchmark::State& state) {
  const auto b = static_cast<std::size_t>(state.range(0));
  const bri::Block x = random_block(b, 3);
  for (auto _ : state) benchmark::DoNotOptimize(bri::invert_dense(x));
}
BENCHMARK(BM_BlockInvert)->RangeMultiplier(2)->Range(8, 256);

// One block of the inverse of a fixed m = 192 matrix.
void BM_InvertBlock(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  const auto provider = bri::make_memory_provider(bri::random_normal_matrix(192, 42, 192.0), k);
  std::size_t peak = 0;
  for (auto _ : state) {
    bri::RunContext context;
    benchmark::DoNotOptimize(bri::invert_block(provider, 1, 1, context));
    peak = context.gauge.peak_bytes();
  }
  state.counters["peak_bytes"] = static_cast<double>(peak);
}
BENCHMARK(BM_InvertBlock)->Arg(2)->Arg(4)->Arg(6)->Arg(8)->Unit(benchmark::kMillisecond);

class NullSink final : public bri::BlockSink {
 public:
  void accept(std::size_t, std::size_t, const bri::Block&) override {}
  void finalize() override {}
};

void BM_InvertFullBri(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  const auto provider = bri::make_memory_provider(bri::random_normal_matrix(192, 42, 192.0), k);
  for (auto _ : state) {
    NullSink sink;
    const auto summary = bri::invert_full(provider, sink);
    state.counters["peak_bytes"] = static_cast<double>(summary.peak_bytes);
  }
}
BENCHMARK(BM_InvertFullBri)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_InvertFullLu(benchmark::State& state) {
  const bri::DenseMatrix m = bri::random_normal_matrix(static_cast<std::size_t>(state.range(0)), 42, 192.0);
  for (auto _ : state) benchmark::DoNotOptimize(bri::lu_invert_full(m));
}
BENCHMARK(BM_InvertFullLu)->Arg(192)->Arg(512)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
