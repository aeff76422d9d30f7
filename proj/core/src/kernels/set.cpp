#include <algorithm>
#include <cstring>
#include <numeric>

#include "kernel_support.hpp"
#include "sort_algorithms.hpp"

namespace dwarfproxy {

namespace {

using detail::ChunkStore;
using detail::ChunkTallies;

// A run is a flat array of fixed-width items: records (Elem = byte, width =
// record_bytes) or ordered double images (Elem = uint64, width = 1).
template <typename Elem>
struct ItemCodec {
  std::uint32_t width;
  int compare(const Elem* x, const Elem* y) const noexcept {
    if constexpr (std::is_same_v<Elem, std::uint8_t>) {
      return std::memcmp(x, y, width);
    } else {
      return *x < *y ? -1 : (*x > *y ? 1 : 0);
    }
  }
};

template <typename Elem>
std::vector<Elem> sorted_distinct(const Elem* items, std::uint64_t count, const ItemCodec<Elem>& codec,
                                  OpCounters& ops) {
  std::vector<std::uint64_t> order(count);
  std::iota(order.begin(), order.end(), 0);
  std::uint64_t compares = 0;
  std::sort(order.begin(), order.end(), [&](std::uint64_t a, std::uint64_t b) {
    ++compares;
    return codec.compare(items + a * codec.width, items + b * codec.width) < 0;
  });
  std::vector<Elem> run;
  run.reserve(count * codec.width);
  for (std::uint64_t i = 0; i < count; ++i) {
    const Elem* item = items + order[i] * codec.width;
    if (!run.empty() && codec.compare(run.data() + run.size() - codec.width, item) == 0) continue;
    run.insert(run.end(), item, item + codec.width);
  }
  ops.integer_ops += compares + count;
  ops.loads += 2 * compares + count;
  ops.stores += run.size() / codec.width;
  ops.branches += compares + count;
  return run;
}

// Merges sorted distinct runs into one sorted distinct run.
template <typename Elem>
std::vector<Elem> merge_distinct(std::vector<std::vector<Elem>> runs, const ItemCodec<Elem>& codec,
                                 OpCounters& ops) {
  std::vector<std::vector<const Elem*>> views(runs.size());
  for (std::size_t r = 0; r < runs.size(); ++r) {
    for (std::size_t i = 0; i < runs[r].size(); i += codec.width) views[r].push_back(&runs[r][i]);
  }
  std::uint64_t compares = 0;
  auto less = [&](const Elem* a, const Elem* b) {
    ++compares;
    return codec.compare(a, b) < 0;
  };
  std::vector<Elem> out;
  detail::kway_merge(views, less, [&](const Elem* item) {
    if (!out.empty() && codec.compare(out.data() + out.size() - codec.width, item) == 0) return;
    out.insert(out.end(), item, item + codec.width);
  });
  ops.integer_ops += compares;
  ops.loads += 2 * compares;
  ops.stores += out.size() / codec.width;
  ops.branches += compares;
  return out;
}

struct SetOutcome {
  std::vector<std::uint8_t> text;
  std::vector<std::uint64_t> keys;
  double jaccard = 1.0;
};

template <typename Elem>
void run_set_impl(const Elem* a_items, std::uint64_t na, const Elem* b_items, std::uint64_t nb,
                  const ItemCodec<Elem>& codec, SetVariant variant, const KernelParams& params,
                  const KernelContext& ctx, ChunkTallies& tallies, OpCounters& combine,
                  KernelReport& report, std::vector<Elem>& result, double& jaccard) {
  const auto a_chunks = make_chunks(na, params.chunk_size);
  const auto b_chunks = make_chunks(nb, params.chunk_size);
  const std::size_t total = a_chunks.size() + b_chunks.size();
  ChunkStore<Elem> store(total, ctx);
  parallel_for(total, params.parallelism_degree, [&](std::uint64_t c) {
    const bool from_a = c < a_chunks.size();
    const auto range = from_a ? a_chunks[c] : b_chunks[c - a_chunks.size()];
    const Elem* base = (from_a ? a_items : b_items) + range.begin * codec.width;
    store.put(c, sorted_distinct(base, range.size(), codec, tallies.ops[c]));
    tallies.work[c] = range.size();
  });
  std::vector<std::vector<Elem>> runs_a;
  std::vector<std::vector<Elem>> runs_b;
  for (std::size_t c = 0; c < total; ++c) {
    (c < a_chunks.size() ? runs_a : runs_b).push_back(store.take(c));
  }
  report.bytes_written = store.bytes_written();
  report.bytes_read = store.bytes_read();

  const auto set_a = merge_distinct(std::move(runs_a), codec, combine);
  const auto set_b = merge_distinct(std::move(runs_b), codec, combine);
  const std::size_t w = codec.width;
  const std::size_t sa = set_a.size() / w;
  const std::size_t sb = set_b.size() / w;
  std::size_t i = 0;
  std::size_t j = 0;
  std::uint64_t inter = 0;
  std::uint64_t uni = 0;
  const bool collect = variant != SetVariant::Jaccard;
  auto emit = [&](const Elem* item) {
    if (collect) result.insert(result.end(), item, item + w);
  };
  while (i < sa || j < sb) {
    int cmp;
    if (i == sa) cmp = 1;
    else if (j == sb) cmp = -1;
    else cmp = codec.compare(&set_a[i * w], &set_b[j * w]);
    ++uni;
    if (cmp == 0) {
      ++inter;
      if (variant == SetVariant::Union || variant == SetVariant::Intersection) emit(&set_a[i * w]);
      ++i;
      ++j;
    } else if (cmp < 0) {
      if (variant == SetVariant::Union || variant == SetVariant::Difference) emit(&set_a[i * w]);
      ++i;
    } else {
      if (variant == SetVariant::Union) emit(&set_b[j * w]);
      ++j;
    }
  }
  combine.integer_ops += uni;
  combine.loads += 2 * uni;
  combine.branches += 2 * uni;
  combine.stores += result.size() / w;
  jaccard = uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
  if (variant == SetVariant::Jaccard) combine.float_ops += 1;
}

}  // namespace

KernelResult run_set(const Dataset& a, const Dataset& b, SetVariant variant,
                     const KernelParams& params, const KernelContext& ctx) {
  const bool a_text = a.kind() == DataKind::Text;
  if (a.kind() == DataKind::Graph || b.kind() == DataKind::Graph ||
      a_text != (b.kind() == DataKind::Text)) {
    throw InputKindError("set expects two text or two vector|matrix inputs, got " +
                         std::string(to_string(a.kind())) + " and " +
                         std::string(to_string(b.kind())));
  }
  params.validate();
  const std::uint64_t na = std::min(a.element_count(), params.input_data_size);
  const std::uint64_t nb = params.input_data_size - na;
  if (nb > b.element_count()) {
    throw ValidationError("input_data_size",
                          "requests " + std::to_string(params.input_data_size) +
                              " elements but the operands hold " +
                              std::to_string(a.element_count() + b.element_count()));
  }
  detail::Stopwatch watch;
  const std::size_t chunk_count = make_chunks(na, params.chunk_size).size() +
                                  make_chunks(nb, params.chunk_size).size();
  ChunkTallies tallies(chunk_count);
  OpCounters combine;
  KernelResult result;
  double jaccard = 1.0;

  if (a_text) {
    const auto& ta = *a.text();
    const auto& tb = *b.text();
    if (ta.record_bytes != tb.record_bytes) {
      throw InputKindError("set operands have different record widths");
    }
    std::vector<std::uint8_t> out;
    run_set_impl<std::uint8_t>(ta.bytes.data(), na, tb.bytes.data(), nb,
                               ItemCodec<std::uint8_t>{ta.record_bytes}, variant, params, ctx,
                               tallies, combine, result.report, out, jaccard);
    if (variant != SetVariant::Jaccard) {
      TextRecords recs{ta.record_bytes, std::move(out)};
      result.output.spec = detail::derived_spec(a, DataKind::Text, recs.count());
      result.output.payload = std::move(recs);
    }
  } else {
    const auto to_keys = [](const std::vector<double>& v, std::uint64_t n) {
      std::vector<std::uint64_t> k(n);
      for (std::uint64_t i = 0; i < n; ++i) k[i] = detail::ordered_bits(v[i]);
      return k;
    };
    const auto ka = to_keys(a.numeric()->values, na);
    const auto kb = to_keys(b.numeric()->values, nb);
    combine.loads += na + nb;
    combine.stores += na + nb;
    std::vector<std::uint64_t> out;
    run_set_impl<std::uint64_t>(ka.data(), na, kb.data(), nb, ItemCodec<std::uint64_t>{1},
                                variant, params, ctx, tallies, combine, result.report, out,
                                jaccard);
    if (variant != SetVariant::Jaccard) {
      std::vector<double> values(out.size());
      for (std::size_t i = 0; i < out.size(); ++i) values[i] = detail::from_ordered_bits(out[i]);
      result.output = detail::make_numeric(a, DataKind::Vector, 1, std::move(values));
    }
  }
  if (variant == SetVariant::Jaccard) {
    result.output = detail::make_numeric(a, DataKind::Vector, 1, {jaccard});
  }
  detail::finish_report(result.report, std::move(tallies), watch, params, combine);
  return result;
}

}  // namespace dwarfproxy
