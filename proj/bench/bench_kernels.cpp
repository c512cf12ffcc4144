// Serial reference against the OpenMP kernels.
#include <benchmark/benchmark.h>

#include "mlab/kernels.hpp"

using namespace mlab;

namespace {

TablePtr family() {
  static TablePtr t = Table::from_manifest(json::parse(R"({"entries":[
    {"kind":"bernoulli","q":"1/3"},{"kind":"bernoulli","q":"2/3"},{"kind":"bernoulli","q":"2/5"},
    {"kind":"bernoulli","q":"3/5"},{"kind":"uniform"}]})"));
  return t;
}

std::vector<Stream> streams(std::size_t count, std::size_t horizon) {
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t i = 0; i < count; ++i) seeds.push_back(i);
  return sample_streams(*family(), 0, seeds, horizon);
}

template <bool Parallel>
void BM_JudgeStreams(benchmark::State& state) {
  auto t = family();
  auto l = frequency_learner(t, {0, 1, 2, 3, 4});
  EvalConfig cfg;
  cfg.horizon = static_cast<std::size_t>(state.range(0));
  cfg.class_members = std::vector<Index>{0, 1, 2, 3};
  auto s = streams(16, cfg.horizon);
  for (auto _ : state) {
    auto r = Parallel ? judge_streams(*t, *l, cfg, s) : judge_streams_serial(*t, *l, cfg, s);
    benchmark::DoNotOptimize(r);
  }
  state.counters["threads"] = Parallel ? kernel_threads() : 1;
}

template <bool Parallel>
void BM_MaxDeficiencies(benchmark::State& state) {
  auto t = family();
  BitString x = streams(1, static_cast<std::size_t>(state.range(0))).front().bits;
  std::vector<Index> idx{0, 1, 2, 3, 4, 0, 1, 2};
  Estimator est;
  for (auto _ : state) {
    auto r = Parallel ? max_deficiencies(*t, est, idx, x) : max_deficiencies_serial(*t, est, idx, x);
    benchmark::DoNotOptimize(r);
  }
}

}  // namespace

BENCHMARK(BM_JudgeStreams<false>)->Arg(1024)->Arg(4096)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_JudgeStreams<true>)->Arg(1024)->Arg(4096)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MaxDeficiencies<false>)->Arg(4096)->Arg(16384)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MaxDeficiencies<true>)->Arg(4096)->Arg(16384)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
