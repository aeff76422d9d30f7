#include <algorithm>
#include <numeric>

#include "kernel_support.hpp"

namespace dwarfproxy {

namespace {

using detail::ChunkStore;
using detail::ChunkTallies;

// Partitions edges of the n-vertex prefix into per-chunk buckets by source.
// This is the input-partition step; it runs on the caller.
std::vector<std::vector<GraphEdge>> bucket_edges(const GraphData& g, std::uint32_t n,
                                                 std::uint64_t chunk_size, std::size_t chunks,
                                                 OpCounters& ops) {
  std::vector<std::vector<GraphEdge>> buckets(chunks);
  for (const auto& e : g.edges) {
    if (e.src < n && e.dst < n) buckets[e.src / chunk_size].push_back(e);
  }
  ops.loads += g.edges.size();
  ops.integer_ops += 3 * g.edges.size();
  ops.branches += 2 * g.edges.size();
  return buckets;
}

// Sorted, deduplicated adjacency of the prefix, built chunk by chunk.
struct Adjacency {
  std::vector<std::uint64_t> offsets;  // n + 1
  std::vector<GraphEdge> edges;        // sorted by (src, dst)
};

Adjacency build_adjacency(const GraphData& g, std::uint32_t n, const KernelParams& params,
                          const std::vector<ChunkRange>& chunks, ChunkTallies& tallies,
                          OpCounters& combine, ChunkStore<GraphEdge>& store) {
  auto buckets = bucket_edges(g, n, params.chunk_size, chunks.size(), combine);
  parallel_for(chunks.size(), params.parallelism_degree, [&](std::uint64_t c) {
    auto edges = std::move(buckets[c]);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    const std::uint64_t m = edges.size();
    const std::uint64_t log_m = m > 1 ? std::bit_width(m) : 1;
    auto& ops = tallies.ops[c];
    ops.integer_ops += 2 * m * log_m;
    ops.loads += 2 * m * log_m;
    ops.stores += m * log_m;
    ops.branches += m * log_m;
    store.put(c, std::move(edges));
  });

  Adjacency adj;
  adj.offsets.assign(static_cast<std::size_t>(n) + 1, 0);
  for (std::size_t c = 0; c < chunks.size(); ++c) {
    auto part = store.take(c);
    adj.edges.insert(adj.edges.end(), part.begin(), part.end());
  }
  for (const auto& e : adj.edges) ++adj.offsets[e.src + 1];
  std::partial_sum(adj.offsets.begin(), adj.offsets.end(), adj.offsets.begin());
  combine.loads += 2 * adj.edges.size() + n;
  combine.stores += adj.edges.size() + n;
  combine.integer_ops += adj.edges.size() + n;
  return adj;
}

Dataset bfs_order(const Dataset& data, const Adjacency& adj, std::uint32_t n,
                  const KernelParams& params, std::vector<std::uint64_t>& frontier_work,
                  OpCounters& ops_total) {
  std::vector<std::uint8_t> visited(n, 0);
  std::vector<double> order;
  order.reserve(n);
  std::uint32_t next_root = 0;
  std::vector<std::uint32_t> frontier;

  while (order.size() < n) {
    if (frontier.empty()) {
      while (visited[next_root]) ++next_root;
      visited[next_root] = 1;
      frontier.push_back(next_root);
      order.push_back(next_root);
      frontier_work.push_back(1);
      ops_total.branches += 1;
    }
    // Expand level: candidates are produced per frontier chunk and merged in
    // chunk order, so the visit order equals a serial BFS.
    const auto fchunks = make_chunks(frontier.size(), params.chunk_size);
    std::vector<std::vector<std::uint32_t>> candidates(fchunks.size());
    std::vector<OpCounters> ops(fchunks.size());
    parallel_for(fchunks.size(), params.parallelism_degree, [&](std::uint64_t c) {
      auto& out = candidates[c];
      auto& o = ops[c];
      for (std::uint64_t i = fchunks[c].begin; i < fchunks[c].end; ++i) {
        const std::uint32_t v = frontier[i];
        for (std::uint64_t k = adj.offsets[v]; k < adj.offsets[v + 1]; ++k) {
          const std::uint32_t w = adj.edges[k].dst;
          if (!visited[w]) out.push_back(w);
        }
        const std::uint64_t deg = adj.offsets[v + 1] - adj.offsets[v];
        o.loads += 2 + 2 * deg;
        o.branches += 1 + deg;
        o.integer_ops += 1 + deg;
      }
      o.stores += out.size();
    });
    std::vector<std::uint32_t> next;
    for (std::size_t c = 0; c < fchunks.size(); ++c) {
      ops_total += ops[c];
      for (std::uint32_t w : candidates[c]) {
        if (!visited[w]) {
          visited[w] = 1;
          next.push_back(w);
          order.push_back(w);
        }
      }
      ops_total.loads += candidates[c].size();
      ops_total.branches += candidates[c].size();
    }
    ops_total.stores += 2 * next.size();
    for (const auto& fc : make_chunks(next.size(), params.chunk_size)) {
      frontier_work.push_back(fc.size());
    }
    frontier = std::move(next);
  }
  return detail::make_numeric(data, DataKind::Vector, 1, std::move(order));
}

std::uint32_t find_root(std::vector<std::uint32_t>& parent, std::uint32_t v) {
  while (parent[v] != v) {
    parent[v] = parent[parent[v]];
    v = parent[v];
  }
  return v;
}

}  // namespace

KernelResult run_graph(const Dataset& data, GraphVariant variant, const KernelParams& params,
                       const KernelContext& ctx) {
  detail::check_input("graph", data, params, {DataKind::Graph});
  detail::Stopwatch watch;
  const auto& g = *data.graph();
  const auto n = static_cast<std::uint32_t>(params.input_data_size);
  const auto chunks = make_chunks(n, params.chunk_size);
  ChunkTallies tallies(chunks.size());
  OpCounters combine;
  KernelResult result;

  if (variant == GraphVariant::DegreeCount) {
    // Raw edge-list degrees: parallel edges count separately.
    auto buckets = bucket_edges(g, n, params.chunk_size, chunks.size(), combine);
    ChunkStore<std::uint32_t> store(chunks.size(), ctx);
    parallel_for(chunks.size(), params.parallelism_degree, [&](std::uint64_t c) {
      // Per-chunk record: out-degrees of the chunk's vertices, then the
      // destination ids whose in-degree must be bumped.
      const auto range = chunks[c];
      std::vector<std::uint32_t> rec(range.size(), 0);
      for (const auto& e : buckets[c]) ++rec[e.src - range.begin];
      for (const auto& e : buckets[c]) rec.push_back(e.dst);
      auto& ops = tallies.ops[c];
      ops.loads += 2 * buckets[c].size();
      ops.stores += 2 * buckets[c].size() + range.size();
      ops.integer_ops += buckets[c].size();
      tallies.work[c] = range.size();
      store.put(c, std::move(rec));
    });
    std::vector<double> degrees(2 * static_cast<std::size_t>(n), 0.0);
    for (std::size_t c = 0; c < chunks.size(); ++c) {
      const auto rec = store.take(c);
      const auto range = chunks[c];
      for (std::uint64_t i = 0; i < range.size(); ++i) degrees[2 * (range.begin + i)] = rec[i];
      for (std::size_t i = range.size(); i < rec.size(); ++i) degrees[2 * rec[i] + 1] += 1.0;
      combine.loads += rec.size();
      combine.stores += rec.size();
      combine.float_ops += rec.size() - range.size();
    }
    result.output = detail::make_numeric(data, DataKind::Matrix, 2, std::move(degrees));
    result.report.bytes_written = store.bytes_written();
    result.report.bytes_read = store.bytes_read();
    detail::finish_report(result.report, std::move(tallies), watch, params, combine);
    return result;
  }

  ChunkStore<GraphEdge> store(chunks.size(), ctx);
  Adjacency adj = build_adjacency(g, n, params, chunks, tallies, combine, store);
  result.report.bytes_written = store.bytes_written();
  result.report.bytes_read = store.bytes_read();

  switch (variant) {
    case GraphVariant::Construct: {
      for (std::size_t c = 0; c < chunks.size(); ++c) tallies.work[c] = chunks[c].size();
      result.output.spec = detail::derived_spec(data, DataKind::Graph, n);
      result.output.payload = GraphData{n, std::move(adj.edges)};
      break;
    }
    case GraphVariant::Bfs: {
      std::vector<std::uint64_t> frontier_work;
      result.output = bfs_order(data, adj, n, params, frontier_work, combine);
      // Traversal work replaces the construction chunks: each vertex is
      // counted once, in the frontier chunk that visited it.
      ChunkTallies traversal(frontier_work.size());
      traversal.work = std::move(frontier_work);
      combine += tallies.total_ops();
      tallies = std::move(traversal);
      break;
    }
    case GraphVariant::ConnectedComponents: {
      std::vector<std::uint32_t> parent(n);
      std::iota(parent.begin(), parent.end(), 0u);
      for (const auto& e : adj.edges) {
        const auto a = find_root(parent, e.src);
        const auto b = find_root(parent, e.dst);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
      std::vector<double> labels(n);
      for (std::uint32_t v = 0; v < n; ++v) labels[v] = find_root(parent, v);
      combine.loads += 4 * adj.edges.size() + 2 * static_cast<std::uint64_t>(n);
      combine.stores += adj.edges.size() + n;
      combine.branches += 2 * adj.edges.size();
      combine.integer_ops += 2 * adj.edges.size();
      for (std::size_t c = 0; c < chunks.size(); ++c) tallies.work[c] = chunks[c].size();
      result.output = detail::make_numeric(data, DataKind::Vector, 1, std::move(labels));
      break;
    }
    case GraphVariant::DegreeCount:
      break;
  }
  detail::finish_report(result.report, std::move(tallies), watch, params, combine);
  return result;
}

}  // namespace dwarfproxy
