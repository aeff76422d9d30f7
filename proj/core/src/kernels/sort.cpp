#include <cstring>
#include <numeric>

#include "kernel_support.hpp"
#include "sort_algorithms.hpp"

namespace dwarfproxy {

namespace {

using detail::ChunkStore;
using detail::ChunkTallies;
using detail::SortTally;

template <typename T, typename Less>
void sort_run(SortVariant variant, T* first, T* last, Less& less, SortTally& tally) {
  if (variant == SortVariant::Quick) {
    detail::quick_sort(first, last, less, tally);
  } else {
    detail::merge_sort(first, last, less, tally);
  }
}

KernelResult sort_text(const Dataset& data, SortVariant variant, const KernelParams& params,
                       const KernelContext& ctx) {
  detail::Stopwatch watch;
  const auto& recs = *data.text();
  const std::uint32_t width = recs.record_bytes;
  const auto chunks = make_chunks(params.input_data_size, params.chunk_size);
  ChunkTallies tallies(chunks.size());
  ChunkStore<std::uint8_t> store(chunks.size(), ctx);

  const auto record_less = [&](const std::uint8_t* a, const std::uint8_t* b) {
    return std::memcmp(a, b, width) < 0;
  };

  parallel_for(chunks.size(), params.parallelism_degree, [&](std::uint64_t c) {
    const auto range = chunks[c];
    std::uint64_t compares = 0;
    auto less = [&](const std::uint8_t* a, const std::uint8_t* b) {
      ++compares;
      return record_less(a, b);
    };
    std::vector<const std::uint8_t*> order(range.size());
    for (std::uint64_t i = 0; i < range.size(); ++i) {
      order[i] = recs.bytes.data() + (range.begin + i) * width;
    }
    SortTally tally;
    sort_run(variant, order.data(), order.data() + order.size(), less, tally);

    std::vector<std::uint8_t> run(range.size() * width);
    for (std::uint64_t i = 0; i < order.size(); ++i) {
      std::memcpy(run.data() + i * width, order[i], width);
    }
    const std::uint64_t words = range.size() * ((width + 7) / 8);
    auto& ops = tallies.ops[c];
    ops.integer_ops += 3 * compares;
    ops.loads += 2 * compares + tally.moves + words;
    ops.stores += tally.moves + words;
    ops.branches += compares;
    tallies.work[c] = range.size();
    store.put(c, std::move(run));
  });

  std::vector<std::vector<const std::uint8_t*>> runs(chunks.size());
  std::vector<std::vector<std::uint8_t>> run_bytes(chunks.size());
  for (std::size_t c = 0; c < chunks.size(); ++c) {
    run_bytes[c] = store.take(c);
    const std::uint64_t n = run_bytes[c].size() / width;
    runs[c].resize(n);
    for (std::uint64_t i = 0; i < n; ++i) runs[c][i] = run_bytes[c].data() + i * width;
  }

  OpCounters combine;
  TextRecords out;
  out.record_bytes = width;
  out.bytes.reserve(params.input_data_size * width);
  if (runs.size() == 1) {
    out.bytes = std::move(run_bytes[0]);
  } else {
    std::uint64_t compares = 0;
    auto less = [&](const std::uint8_t* a, const std::uint8_t* b) {
      ++compares;
      return record_less(a, b);
    };
    detail::kway_merge(runs, less, [&](const std::uint8_t* rec) {
      out.bytes.insert(out.bytes.end(), rec, rec + width);
    });
    const std::uint64_t words = params.input_data_size * ((width + 7) / 8);
    combine.integer_ops += 3 * compares;
    combine.loads += 2 * compares + words;
    combine.stores += words;
    combine.branches += compares;
  }

  KernelResult result;
  result.output.spec = detail::derived_spec(data, DataKind::Text, params.input_data_size);
  result.output.payload = std::move(out);
  result.report.bytes_written = store.bytes_written();
  result.report.bytes_read = store.bytes_read();
  detail::finish_report(result.report, std::move(tallies), watch, params, combine);
  return result;
}

KernelResult sort_numeric(const Dataset& data, SortVariant variant, const KernelParams& params,
                          const KernelContext& ctx) {
  detail::Stopwatch watch;
  const auto& values = data.numeric()->values;
  const auto chunks = make_chunks(params.input_data_size, params.chunk_size);
  ChunkTallies tallies(chunks.size());
  ChunkStore<double> store(chunks.size(), ctx);

  const auto value_less = [](double a, double b) {
    return detail::ordered_bits(a) < detail::ordered_bits(b);
  };

  parallel_for(chunks.size(), params.parallelism_degree, [&](std::uint64_t c) {
    const auto range = chunks[c];
    std::uint64_t compares = 0;
    auto less = [&](double a, double b) {
      ++compares;
      return value_less(a, b);
    };
    std::vector<double> run(values.begin() + static_cast<std::ptrdiff_t>(range.begin),
                            values.begin() + static_cast<std::ptrdiff_t>(range.end));
    SortTally tally;
    sort_run(variant, run.data(), run.data() + run.size(), less, tally);
    auto& ops = tallies.ops[c];
    ops.float_ops += compares;
    ops.loads += 2 * compares + tally.moves + range.size();
    ops.stores += tally.moves + range.size();
    ops.branches += compares;
    tallies.work[c] = range.size();
    store.put(c, std::move(run));
  });

  std::vector<std::vector<double>> runs(chunks.size());
  for (std::size_t c = 0; c < chunks.size(); ++c) runs[c] = store.take(c);

  OpCounters combine;
  std::vector<double> out;
  if (runs.size() == 1) {
    out = std::move(runs[0]);
  } else {
    out.reserve(params.input_data_size);
    std::uint64_t compares = 0;
    auto less = [&](double a, double b) {
      ++compares;
      return value_less(a, b);
    };
    detail::kway_merge(runs, less, [&](double v) { out.push_back(v); });
    combine.float_ops += compares;
    combine.loads += 2 * compares + params.input_data_size;
    combine.stores += params.input_data_size;
    combine.branches += compares;
  }

  KernelResult result;
  result.output = detail::make_numeric(data, DataKind::Vector, 1, std::move(out));
  result.report.bytes_written = store.bytes_written();
  result.report.bytes_read = store.bytes_read();
  detail::finish_report(result.report, std::move(tallies), watch, params, combine);
  return result;
}

}  // namespace

KernelResult run_sort(const Dataset& data, SortVariant variant, const KernelParams& params,
                      const KernelContext& ctx) {
  detail::check_input("sort", data, params, {DataKind::Text, DataKind::Vector, DataKind::Matrix});
  if (data.kind() == DataKind::Text) return sort_text(data, variant, params, ctx);
  return sort_numeric(data, variant, params, ctx);
}

}  // namespace dwarfproxy
