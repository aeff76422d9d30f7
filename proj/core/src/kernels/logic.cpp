#include <algorithm>
#include <cstring>
#include <limits>

#include "dwarfproxy/random.hpp"
#include "kernel_support.hpp"

namespace dwarfproxy {

namespace {

using detail::ChunkStore;
using detail::ChunkTallies;

constexpr std::uint64_t kHashMul = 0x9fb21c651e98df25ULL;

std::uint64_t element_key(const Dataset& data, std::uint64_t i, std::uint64_t salt) {
  if (const auto* t = data.text()) return hash_bytes(t->record(i), salt);
  return mix64(std::bit_cast<std::uint64_t>(data.numeric()->values[i]) ^ salt);
}

std::uint64_t keystream_word(std::uint64_t key, std::uint64_t word_index) {
  return mix64(key ^ (word_index * kHashMul));
}

}  // namespace

KernelResult run_logic(const Dataset& data, LogicVariant variant, const KernelParams& params,
                       const KernelContext& ctx) {
  detail::check_input("logic", data, params, {DataKind::Text, DataKind::Vector, DataKind::Matrix});
  detail::Stopwatch watch;
  const auto chunks = make_chunks(params.input_data_size, params.chunk_size);
  ChunkTallies tallies(chunks.size());
  const std::uint64_t key = ctx.options.key;
  const std::uint64_t words_per_item =
      data.text() ? (data.text()->record_bytes + 7) / 8 : 1;
  KernelResult result;

  if (variant == LogicVariant::XorCipher) {
    if (const auto* t = data.text()) {
      const std::uint32_t width = t->record_bytes;
      ChunkStore<std::uint8_t> store(chunks.size(), ctx);
      parallel_for(chunks.size(), params.parallelism_degree, [&](std::uint64_t c) {
        const auto range = chunks[c];
        std::vector<std::uint8_t> out(t->bytes.begin() + static_cast<std::ptrdiff_t>(range.begin * width),
                                      t->bytes.begin() + static_cast<std::ptrdiff_t>(range.end * width));
        const std::uint64_t base = range.begin * width;
        for (std::uint64_t p = 0; p < out.size(); ++p) {
          const std::uint64_t g = base + p;
          out[p] ^= static_cast<std::uint8_t>(keystream_word(key, g / 8) >> (8 * (g % 8)));
        }
        auto& ops = tallies.ops[c];
        ops.integer_ops += out.size() * 2 + (out.size() / 8 + 1) * 9;
        ops.loads += out.size();
        ops.stores += out.size();
        tallies.work[c] = range.size();
        store.put(c, std::move(out));
      });
      TextRecords recs;
      recs.record_bytes = width;
      for (std::size_t c = 0; c < chunks.size(); ++c) {
        auto part = store.take(c);
        recs.bytes.insert(recs.bytes.end(), part.begin(), part.end());
      }
      result.output.spec = detail::derived_spec(data, DataKind::Text, recs.count());
      result.output.payload = std::move(recs);
      result.report.bytes_written = store.bytes_written();
      result.report.bytes_read = store.bytes_read();
    } else {
      const auto& nd = *data.numeric();
      ChunkStore<double> store(chunks.size(), ctx);
      parallel_for(chunks.size(), params.parallelism_degree, [&](std::uint64_t c) {
        const auto range = chunks[c];
        std::vector<double> out(range.size());
        for (std::uint64_t i = range.begin; i < range.end; ++i) {
          out[i - range.begin] = std::bit_cast<double>(std::bit_cast<std::uint64_t>(nd.values[i]) ^
                                                       keystream_word(key, i));
        }
        auto& ops = tallies.ops[c];
        ops.integer_ops += range.size() * 10;
        ops.loads += range.size();
        ops.stores += range.size();
        tallies.work[c] = range.size();
        store.put(c, std::move(out));
      });
      std::vector<double> out;
      for (std::size_t c = 0; c < chunks.size(); ++c) {
        auto part = store.take(c);
        out.insert(out.end(), part.begin(), part.end());
      }
      result.output = detail::make_numeric(data, data.kind(), nd.dim, std::move(out));
      result.report.bytes_written = store.bytes_written();
      result.report.bytes_read = store.bytes_read();
    }
    detail::finish_report(result.report, std::move(tallies), watch, params);
    return result;
  }

  if (variant == LogicVariant::Hash) {
    ChunkStore<double> store(chunks.size(), ctx);
    parallel_for(chunks.size(), params.parallelism_degree, [&](std::uint64_t c) {
      const auto range = chunks[c];
      std::vector<double> out(range.size());
      for (std::uint64_t i = range.begin; i < range.end; ++i) {
        out[i - range.begin] = static_cast<double>(element_key(data, i, key) >> 11);
      }
      auto& ops = tallies.ops[c];
      ops.integer_ops += range.size() * (8 * words_per_item + 4);
      ops.loads += range.size() * words_per_item;
      ops.stores += range.size();
      ops.branches += range.size() * words_per_item;
      tallies.work[c] = range.size();
      store.put(c, std::move(out));
    });
    std::vector<double> out;
    for (std::size_t c = 0; c < chunks.size(); ++c) {
      auto part = store.take(c);
      out.insert(out.end(), part.begin(), part.end());
    }
    result.output = detail::make_numeric(data, DataKind::Vector, 1, std::move(out));
    result.report.bytes_written = store.bytes_written();
    result.report.bytes_read = store.bytes_read();
    detail::finish_report(result.report, std::move(tallies), watch, params);
    return result;
  }

  // MinHash: per-chunk signature minima, combined by element-wise min.
  const std::uint32_t k = ctx.options.hashes;
  std::vector<std::uint64_t> salts(k);
  for (std::uint32_t h = 0; h < k; ++h) salts[h] = mix64(key + h * kHashMul);
  ChunkStore<std::uint64_t> store(chunks.size(), ctx);
  parallel_for(chunks.size(), params.parallelism_degree, [&](std::uint64_t c) {
    const auto range = chunks[c];
    std::vector<std::uint64_t> sig(k, std::numeric_limits<std::uint64_t>::max());
    for (std::uint64_t i = range.begin; i < range.end; ++i) {
      const std::uint64_t base = element_key(data, i, 0);
      for (std::uint32_t h = 0; h < k; ++h) sig[h] = std::min(sig[h], mix64(base ^ salts[h]));
    }
    auto& ops = tallies.ops[c];
    ops.integer_ops += range.size() * (k * 9 + 8 * words_per_item);
    ops.loads += range.size() * (k + words_per_item);
    ops.stores += range.size() * k / 4;
    ops.branches += range.size() * k;
    tallies.work[c] = range.size();
    store.put(c, std::move(sig));
  });
  std::vector<std::uint64_t> sig(k, std::numeric_limits<std::uint64_t>::max());
  OpCounters combine;
  for (std::size_t c = 0; c < chunks.size(); ++c) {
    const auto part = store.take(c);
    for (std::uint32_t h = 0; h < k; ++h) sig[h] = std::min(sig[h], part[h]);
    combine.loads += 2 * k;
    combine.branches += k;
  }
  std::vector<double> out(k);
  for (std::uint32_t h = 0; h < k; ++h) out[h] = static_cast<double>(sig[h] >> 11);
  result.output = detail::make_numeric(data, DataKind::Vector, 1, std::move(out));
  result.report.bytes_written = store.bytes_written();
  result.report.bytes_read = store.bytes_read();
  detail::finish_report(result.report, std::move(tallies), watch, params, combine);
  return result;
}

double minhash_similarity(const Dataset& signature_a, const Dataset& signature_b) {
  const auto* a = signature_a.numeric();
  const auto* b = signature_b.numeric();
  if (!a || !b) throw InputKindError("minhash signatures must be vector datasets");
  if (a->values.size() != b->values.size() || a->values.empty()) {
    throw ValidationError("signature", "signatures must be non-empty and of equal length");
  }
  std::size_t equal = 0;
  for (std::size_t i = 0; i < a->values.size(); ++i) equal += a->values[i] == b->values[i];
  return static_cast<double>(equal) / static_cast<double>(a->values.size());
}

}  // namespace dwarfproxy
