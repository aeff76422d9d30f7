#include <benchmark/benchmark.h>

#include <string>

#include "dwarfproxy/proxydag.hpp"

namespace {

using namespace dwarfproxy;

void execute_reference(benchmark::State& state, const char* name) {
  auto dag = load_reference(name);
  dag.total_work_budget = static_cast<std::uint64_t>(state.range(0));
  DatasetCache cache;
  ExecuteOptions opts;
  opts.cache = &cache;
  for (auto _ : state) {
    auto run = execute(dag, 0, opts);
    benchmark::DoNotOptimize(run.work_items);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * dag.total_work_budget));
}

}  // namespace

BENCHMARK_CAPTURE(execute_reference, terasort, "terasort")->Arg(100'000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(execute_reference, kmeans, "kmeans")->Arg(100'000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(execute_reference, pagerank, "pagerank")->Arg(100'000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(execute_reference, sift, "sift")->Arg(100'000)->Unit(benchmark::kMillisecond);
