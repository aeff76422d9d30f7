#include <algorithm>
#include <cmath>
#include <limits>

#include "kernel_support.hpp"

namespace dwarfproxy {

namespace {

using detail::ChunkStore;
using detail::ChunkTallies;

// Per-chunk partial results are small; spilling them still exercises the
// write-then-combine path of the execution model.
std::vector<std::vector<double>> gather(ChunkStore<double>& store, std::size_t chunks) {
  std::vector<std::vector<double>> parts(chunks);
  for (std::size_t c = 0; c < chunks; ++c) parts[c] = store.take(c);
  return parts;
}

}  // namespace

KernelResult run_statistic(const Dataset& data, StatisticVariant variant,
                           const KernelParams& params, const KernelContext& ctx) {
  detail::check_input("statistic", data, params, {DataKind::Vector, DataKind::Matrix});
  detail::Stopwatch watch;
  const auto& nd = *data.numeric();
  const std::uint32_t dim = nd.dim;
  const std::uint64_t n = params.input_data_size;
  const auto chunks = detail::row_chunks(n, dim, params.chunk_size);
  ChunkTallies tallies(chunks.size());
  OpCounters combine;
  std::uint64_t spill_written = 0;
  std::uint64_t spill_read = 0;
  std::vector<double> out;

  const auto account = [&](ChunkStore<double>& store) {
    spill_written += store.bytes_written();
    spill_read += store.bytes_read();
  };

  switch (variant) {
    case StatisticVariant::Count: {
      ChunkStore<double> store(chunks.size(), ctx);
      parallel_for(chunks.size(), params.parallelism_degree, [&](std::uint64_t c) {
        const auto range = chunks[c];
        std::vector<double> counts(dim, 0.0);
        for (std::uint64_t r0 = range.begin; r0 < range.end; r0 += dim) {
          const std::uint64_t r1 = std::min<std::uint64_t>(r0 + dim, range.end);
          std::uint64_t best = r0;
          for (std::uint64_t i = r0 + 1; i < r1; ++i) {
            if (nd.values[i] < nd.values[best]) best = i;
          }
          counts[best - r0] += 1.0;
        }
        auto& ops = tallies.ops[c];
        ops.float_ops += range.size();
        ops.loads += range.size();
        ops.branches += range.size();
        ops.integer_ops += range.size() / dim + 1;
        ops.stores += range.size() / dim + 1;
        tallies.work[c] = range.size();
        store.put(c, std::move(counts));
      });
      out.assign(dim, 0.0);
      for (const auto& part : gather(store, chunks.size())) {
        for (std::uint32_t j = 0; j < dim; ++j) out[j] += part[j];
      }
      combine.float_ops += chunks.size() * dim;
      account(store);
      break;
    }
    case StatisticVariant::Average: {
      // Layout per chunk: dim sums followed by dim counts.
      ChunkStore<double> store(chunks.size(), ctx);
      parallel_for(chunks.size(), params.parallelism_degree, [&](std::uint64_t c) {
        const auto range = chunks[c];
        std::vector<double> acc(2 * static_cast<std::size_t>(dim), 0.0);
        for (std::uint64_t i = range.begin; i < range.end; ++i) {
          const auto col = static_cast<std::uint32_t>(i % dim);
          acc[col] += nd.values[i];
          acc[dim + col] += 1.0;
        }
        auto& ops = tallies.ops[c];
        ops.float_ops += 2 * range.size();
        ops.integer_ops += range.size();
        ops.loads += 2 * range.size();
        ops.stores += 2 * range.size();
        tallies.work[c] = range.size();
        store.put(c, std::move(acc));
      });
      std::vector<double> acc(2 * static_cast<std::size_t>(dim), 0.0);
      for (const auto& part : gather(store, chunks.size())) {
        for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += part[j];
      }
      out.resize(dim);
      for (std::uint32_t j = 0; j < dim; ++j) out[j] = acc[dim + j] > 0 ? acc[j] / acc[dim + j] : 0.0;
      combine.float_ops += chunks.size() * 2 * dim + dim;
      account(store);
      break;
    }
    case StatisticVariant::MinMax:
    case StatisticVariant::HistogramProbability: {
      ChunkStore<double> store(chunks.size(), ctx);
      parallel_for(chunks.size(), params.parallelism_degree, [&](std::uint64_t c) {
        const auto range = chunks[c];
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (std::uint64_t i = range.begin; i < range.end; ++i) {
          lo = std::min(lo, nd.values[i]);
          hi = std::max(hi, nd.values[i]);
        }
        auto& ops = tallies.ops[c];
        ops.float_ops += 2 * range.size();
        ops.loads += range.size();
        ops.branches += 2 * range.size();
        tallies.work[c] = range.size();
        store.put(c, {lo, hi});
      });
      double lo = std::numeric_limits<double>::infinity();
      double hi = -std::numeric_limits<double>::infinity();
      for (const auto& part : gather(store, chunks.size())) {
        lo = std::min(lo, part[0]);
        hi = std::max(hi, part[1]);
      }
      combine.float_ops += 2 * chunks.size();
      account(store);
      if (variant == StatisticVariant::MinMax) {
        out = {lo, hi};
        break;
      }
      const std::uint32_t bins = ctx.options.bins;
      const double width = hi > lo ? (hi - lo) / bins : 0.0;
      ChunkStore<double> hist_store(chunks.size(), ctx);
      parallel_for(chunks.size(), params.parallelism_degree, [&](std::uint64_t c) {
        const auto range = chunks[c];
        std::vector<double> counts(bins, 0.0);
        for (std::uint64_t i = range.begin; i < range.end; ++i) {
          std::uint32_t b = 0;
          if (width > 0.0) {
            b = static_cast<std::uint32_t>(
                std::min<double>(std::floor((nd.values[i] - lo) / width), bins - 1));
          }
          counts[b] += 1.0;
        }
        auto& ops = tallies.ops[c];
        ops.float_ops += 4 * range.size();
        ops.integer_ops += range.size();
        ops.loads += 2 * range.size();
        ops.stores += range.size();
        ops.branches += range.size();
        hist_store.put(c, std::move(counts));
      });
      out.assign(bins, 0.0);
      for (const auto& part : gather(hist_store, chunks.size())) {
        for (std::uint32_t j = 0; j < bins; ++j) out[j] += part[j];
      }
      for (auto& v : out) v /= static_cast<double>(n);
      combine.float_ops += chunks.size() * bins + bins;
      account(hist_store);
      break;
    }
  }

  KernelResult result;
  result.output = detail::make_numeric(data, DataKind::Vector, 1, std::move(out));
  result.report.bytes_written = spill_written;
  result.report.bytes_read = spill_read;
  detail::finish_report(result.report, std::move(tallies), watch, params, combine);
  return result;
}

}  // namespace dwarfproxy
