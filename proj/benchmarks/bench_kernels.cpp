#include <benchmark/benchmark.h>

#include "dwarfproxy/datagen.hpp"
#include "dwarfproxy/kernels.hpp"

namespace {

using namespace dwarfproxy;

Dataset input_for(Dwarf dwarf, std::uint64_t n) {
  DataSpec s;
  s.seed = 1;
  s.size = n;
  switch (dwarf) {
    case Dwarf::Sort:
      return text_records(n, 100, 1);
    case Dwarf::Graph:
      s.kind = DataKind::Graph;
      return generate(s);
    case Dwarf::Matrix:
    case Dwarf::BasicStatistic:
      s.kind = DataKind::Matrix;
      s.dim = 16;
      return generate(s);
    default:
      s.kind = DataKind::Vector;
      s.value_range = {0, static_cast<double>(n)};
      return generate(s);
  }
}

void run_variant(benchmark::State& state, Dwarf dwarf, const char* variant) {
  const auto n = static_cast<std::uint64_t>(state.range(0));
  const auto a = input_for(dwarf, n);
  KernelInvocation inv;
  inv.dwarf = dwarf;
  inv.variant = variant;
  inv.params.input_data_size = dwarf == Dwarf::Set ? 2 * a.element_count() : a.element_count();
  inv.params.chunk_size = 4096;
  inv.params.parallelism_degree = static_cast<std::uint32_t>(state.range(1));
  for (auto _ : state) {
    auto r = run_kernel(inv, a, dwarf == Dwarf::Set ? &a : nullptr, 0);
    benchmark::DoNotOptimize(r.report.work_items);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * inv.params.input_data_size));
}

void args(benchmark::internal::Benchmark* b) {
  b->ArgNames({"n", "par"})->Args({1 << 14, 1})->Args({1 << 16, 1})->Args({1 << 16, 4})
      ->Unit(benchmark::kMillisecond);
}

}  // namespace

BENCHMARK_CAPTURE(run_variant, sort_quick, Dwarf::Sort, "quick")->Apply(args);
BENCHMARK_CAPTURE(run_variant, sort_merge, Dwarf::Sort, "merge")->Apply(args);
BENCHMARK_CAPTURE(run_variant, sampling_random, Dwarf::Sampling, "random")->Apply(args);
BENCHMARK_CAPTURE(run_variant, transform_fft, Dwarf::Transform, "fft")->Apply(args);
BENCHMARK_CAPTURE(run_variant, matrix_euclidean, Dwarf::Matrix, "euclidean_distance")->Apply(args);
BENCHMARK_CAPTURE(run_variant, set_union, Dwarf::Set, "union")->Apply(args);
BENCHMARK_CAPTURE(run_variant, logic_hash, Dwarf::Logic, "hash")->Apply(args);
BENCHMARK_CAPTURE(run_variant, statistic_average, Dwarf::BasicStatistic, "average")->Apply(args);
BENCHMARK_CAPTURE(run_variant, graph_bfs, Dwarf::Graph, "bfs")->Apply(args);
