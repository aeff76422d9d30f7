#include <cmath>
#include <cstring>

#include "dwarfproxy/random.hpp"
#include "kernel_support.hpp"

namespace dwarfproxy {

namespace {

using detail::ChunkStore;
using detail::ChunkTallies;

// Selection depends only on the global element index, never on chunking.
struct Selector {
  SamplingVariant variant;
  double fraction;
  std::uint64_t stride;
  std::uint64_t seed;

  bool keep(std::uint64_t index) const noexcept {
    if (variant == SamplingVariant::Interval) return index % stride == 0;
    return static_cast<double>(mix64(seed ^ mix64(index)) >> 11) * 0x1.0p-53 < fraction;
  }
};

}  // namespace

KernelResult run_sampling(const Dataset& data, SamplingVariant variant, double fraction,
                          const KernelParams& params, const KernelContext& ctx) {
  detail::check_input("sampling", data, params,
                      {DataKind::Text, DataKind::Vector, DataKind::Matrix});
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ValidationError("fraction", "must lie in (0, 1]");
  }
  detail::Stopwatch watch;
  const Selector sel{variant, fraction,
                     std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(1.0 / fraction))),
                     split_seed(ctx.seed, 0x5a4d)};
  const auto chunks = make_chunks(params.input_data_size, params.chunk_size);
  ChunkTallies tallies(chunks.size());
  KernelResult result;

  if (const auto* recs = data.text()) {
    const std::uint32_t width = recs->record_bytes;
    ChunkStore<std::uint8_t> store(chunks.size(), ctx);
    parallel_for(chunks.size(), params.parallelism_degree, [&](std::uint64_t c) {
      std::vector<std::uint8_t> kept;
      std::uint64_t n_kept = 0;
      for (std::uint64_t i = chunks[c].begin; i < chunks[c].end; ++i) {
        if (sel.keep(i)) {
          const auto rec = recs->record(i);
          kept.insert(kept.end(), rec.begin(), rec.end());
          ++n_kept;
        }
      }
      auto& ops = tallies.ops[c];
      const std::uint64_t n = chunks[c].size();
      const std::uint64_t words = n_kept * ((width + 7) / 8);
      ops.integer_ops += n * (variant == SamplingVariant::Random ? 12 : 2);
      if (variant == SamplingVariant::Random) ops.float_ops += n;
      ops.branches += n;
      ops.loads += words;
      ops.stores += words;
      tallies.work[c] = n;
      store.put(c, std::move(kept));
    });
    TextRecords out;
    out.record_bytes = width;
    for (std::size_t c = 0; c < chunks.size(); ++c) {
      auto part = store.take(c);
      out.bytes.insert(out.bytes.end(), part.begin(), part.end());
    }
    result.output.spec = detail::derived_spec(data, DataKind::Text, out.count());
    result.output.payload = std::move(out);
    result.report.bytes_written = store.bytes_written();
    result.report.bytes_read = store.bytes_read();
  } else {
    const auto& values = data.numeric()->values;
    ChunkStore<double> store(chunks.size(), ctx);
    parallel_for(chunks.size(), params.parallelism_degree, [&](std::uint64_t c) {
      std::vector<double> kept;
      for (std::uint64_t i = chunks[c].begin; i < chunks[c].end; ++i) {
        if (sel.keep(i)) kept.push_back(values[i]);
      }
      auto& ops = tallies.ops[c];
      const std::uint64_t n = chunks[c].size();
      ops.integer_ops += n * (variant == SamplingVariant::Random ? 12 : 2);
      if (variant == SamplingVariant::Random) ops.float_ops += n;
      ops.branches += n;
      ops.loads += kept.size();
      ops.stores += kept.size();
      tallies.work[c] = n;
      store.put(c, std::move(kept));
    });
    std::vector<double> out;
    for (std::size_t c = 0; c < chunks.size(); ++c) {
      auto part = store.take(c);
      out.insert(out.end(), part.begin(), part.end());
    }
    result.output = detail::make_numeric(data, data.kind(), data.numeric()->dim, std::move(out));
    result.report.bytes_written = store.bytes_written();
    result.report.bytes_read = store.bytes_read();
  }
  detail::finish_report(result.report, std::move(tallies), watch, params);
  return result;
}

}  // namespace dwarfproxy
