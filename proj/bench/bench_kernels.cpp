// Serial reference kernels against their OpenMP counterparts.
//
//   ./seqscore_bench --benchmark_counters_tabular=true
//
// Arguments are (vocabulary width, depth) for enumeration and (threads) for
// the parallel variants.

#include <benchmark/benchmark.h>

#include "seqscore/reference.hpp"
#include "seqscore/study.hpp"
#include "seqscore/synthdist.hpp"

using namespace seqscore;

namespace {

SyntheticModel bench_model(const benchmark::State& state) {
  const auto width = static_cast<std::size_t>(state.range(0));
  const auto depth = static_cast<std::size_t>(state.range(1));
  return sample_model(DirichletSpec::preset(width), depth, 1);
}

void set_leaves(benchmark::State& state) {
  const auto leaves = leaf_count(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * leaves));
}

void BM_ExactStatsSerial(benchmark::State& state) {
  const auto model = bench_model(state);
  for (auto _ : state) benchmark::DoNotOptimize(reference::exact_stats(model));
  set_leaves(state);
}

void BM_ExactStatsParallel(benchmark::State& state) {
  const auto model = bench_model(state);
  set_thread_count(static_cast<int>(state.range(2)));
  for (auto _ : state) benchmark::DoNotOptimize(exact_stats(model));
  set_leaves(state);
}

EntropyStudyConfig study_config() {
  EntropyStudyConfig cfg;
  cfg.grid.specs = preset_specs({20});
  cfg.grid.depths = {3};
  cfg.grid.runs = 200;
  cfg.sample_counts = iota_counts(10);
  cfg.temperatures = {1.0};
  return cfg;
}

void BM_EntropyStudySerial(benchmark::State& state) {
  const auto cfg = study_config();
  for (auto _ : state) benchmark::DoNotOptimize(entropy_study(cfg, Execution::Serial));
}

void BM_EntropyStudyParallel(benchmark::State& state) {
  const auto cfg = study_config();
  set_thread_count(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(entropy_study(cfg, Execution::Parallel));
}

}  // namespace

BENCHMARK(BM_ExactStatsSerial)->Args({20, 3})->Args({20, 4})->Args({100, 2})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ExactStatsParallel)
    ->ArgsProduct({{20}, {3, 4}, {1, 2, 4}})
    ->Args({100, 2, 1})
    ->Args({100, 2, 4})
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();
BENCHMARK(BM_EntropyStudySerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EntropyStudyParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
