#include <benchmark/benchmark.h>

#include "tpadv/exact.hpp"
#include "tpadv/game.hpp"
#include "tpadv/stream.hpp"

using namespace tpadv;

static void BM_ExactAdvantage(benchmark::State& state) {
  const Params p(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)),
                 static_cast<std::uint64_t>(state.range(2)));
  for (auto _ : state) benchmark::DoNotOptimize(exact_advantage(p));
}
BENCHMARK(BM_ExactAdvantage)->Args({8, 4, 32})->Args({8, 4, 64})->Args({12, 10, 64})->Unit(benchmark::kMillisecond);

static void BM_ExactAdvantageFast(benchmark::State& state) {
  const Params p(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)),
                 static_cast<std::uint64_t>(state.range(2)));
  ExactOptions opts;
  opts.arithmetic = Arithmetic::fast;
  for (auto _ : state) benchmark::DoNotOptimize(exact_advantage(p, opts));
}
BENCHMARK(BM_ExactAdvantageFast)->Args({8, 4, 64})->Args({20, 18, 64})->Unit(benchmark::kMillisecond);

static void BM_FunctionSampler(benchmark::State& state) {
  const Params p(32, 16, static_cast<std::uint64_t>(state.range(0)));
  Rng rng(1);
  std::vector<std::uint64_t> out;
  for (auto _ : state) {
    sample_function_replies(p, rng, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FunctionSampler)->Arg(256)->Arg(4096);

static void BM_PermutationSampler(benchmark::State& state) {
  const Params p(static_cast<int>(state.range(0)), 4, static_cast<std::uint64_t>(state.range(1)));
  PermutationSampler sampler(p);
  Rng rng(1);
  std::vector<std::uint64_t> out;
  for (auto _ : state) {
    sampler.sample(rng, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(1));
}
BENCHMARK(BM_PermutationSampler)->Args({16, 256})->Args({16, 4096})->Args({40, 4096});

static void BM_PlayGame(benchmark::State& state) {
  const Params p(16, 8, 256);
  const Rule r = optimal_rule(Direction::r_greater);
  for (auto _ : state) benchmark::DoNotOptimize(play_game(p, r, 4096, 1));
  state.SetItemsProcessed(state.iterations() * 2 * 4096);
}
BENCHMARK(BM_PlayGame)->Unit(benchmark::kMillisecond);

static void BM_StreamFeistel(benchmark::State& state) {
  const auto f = stream::demo_permutation(128, 1);
  const stream::StreamConfig cfg{128, static_cast<int>(state.range(0)), 1 << 16, 0, stream::Packing::bit_packed};
  std::uint64_t bytes = 0;
  for (auto _ : state) {
    stream::DiscardSink sink;
    stream::generate_stream(f, cfg, sink);
    bytes += sink.written;
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(bytes));
}
BENCHMARK(BM_StreamFeistel)->Arg(64)->Arg(96)->Unit(benchmark::kMillisecond);

static void BM_StreamExplicit(benchmark::State& state) {
  const auto p = stream::explicit_permutation(20, 1);
  const stream::StreamConfig cfg{20, 4, 1 << 20, 0, stream::Packing::bit_packed};
  std::uint64_t bytes = 0;
  for (auto _ : state) {
    stream::DiscardSink sink;
    stream::generate_stream(p, cfg, sink);
    bytes += sink.written;
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(bytes));
}
BENCHMARK(BM_StreamExplicit)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
