#pragma once

#include <cstdint>
#include <exception>
#include <filesystem>
#include <istream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dwarfproxy/datagen.hpp"
#include "dwarfproxy/error.hpp"
#include "dwarfproxy/kernels.hpp"

namespace dwarfproxy {

enum class NodeRole : std::uint8_t { Source, Intermediate, Sink };

std::string_view to_string(NodeRole role) noexcept;
NodeRole parse_node_role(std::string_view text);

struct ProxyNode {
  std::string id;
  NodeRole role = NodeRole::Intermediate;
  // Sources only. spec.size == 0 means "auto": the largest demand among the
  // node's outgoing edges, rounded up to a power of two.
  DataSpec spec;

  bool operator==(const ProxyNode&) const = default;
};

struct ProxyEdge {
  std::string from;
  std::string to;
  // params.input_data_size is derived from weight and the DAG budget.
  KernelInvocation invocation;

  bool operator==(const ProxyEdge&) const = default;
};

struct ProxyDag {
  std::string name;
  std::vector<ProxyNode> nodes;
  std::vector<ProxyEdge> edges;
  std::uint64_t total_work_budget = 1'000'000;

  const ProxyNode* find_node(std::string_view id) const noexcept;
  bool operator==(const ProxyDag&) const = default;
};

struct Violation {
  std::string subject;  // "node <id>", "edge <n>" or "dag"
  std::string rule;
  std::string message;

  std::string to_string() const;
};

// Empty iff the DAG is structurally valid and executable.
std::vector<Violation> validate(const ProxyDag& dag);

// "e<index> <from>-><to> <dwarf>/<variant>"
std::string edge_label(const ProxyDag& dag, std::size_t edge);

// round(weight * budget), at least 1.
std::uint64_t edge_input_size(const ProxyDag& dag, std::size_t edge);

// The parameters an edge actually runs with: derived size, chunk clamped to it.
KernelParams effective_params(const ProxyDag& dag, std::size_t edge);

// Writes effective input sizes into every edge's params.
void apply_budget(ProxyDag& dag);

// Reference proxies: terasort, kmeans, pagerank, sift.
std::span<const std::string_view> reference_names() noexcept;
ProxyDag load_reference(std::string_view name);
// The shipped definition text of a reference proxy.
std::string_view reference_document(std::string_view name);

// Line-oriented definition format; see proxies/README.md for the grammar.
std::string serialize(const ProxyDag& dag);
ProxyDag parse_proxy(std::string_view document);
ProxyDag load_proxy_file(const std::filesystem::path& path);
void save_proxy_file(const std::filesystem::path& path, const ProxyDag& dag);

// Thread-safe memo of generated source datasets keyed by their full spec.
class DatasetCache {
 public:
  std::shared_ptr<const Dataset> get(const DataSpec& spec);
  std::size_t size() const;
  void clear();

 private:
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<const Dataset>> entries_;
};

struct ExecuteOptions {
  // Run independent edges one at a time.
  bool serial = false;
  DatasetCache* cache = nullptr;
  // Overrides default_spill_root() when set.
  std::optional<std::filesystem::path> spill_root;
  // Keep every node's materialized dataset in RunResult::node_outputs.
  bool retain_outputs = false;
};

struct EdgeRun {
  std::size_t edge = 0;
  std::string label;
  KernelParams params;
  KernelReport report;
  // Seconds since the start of execute().
  double start = 0.0;
  double finish = 0.0;
  std::uint64_t output_elements = 0;
  std::uint64_t output_digest = 0;
};

// Process-level I/O counters (/proc/self/io rchar / wchar).
struct ProcessIo {
  std::uint64_t read_bytes = 0;
  std::uint64_t write_bytes = 0;
};
std::optional<ProcessIo> read_process_io();

struct RunResult {
  std::string proxy;
  std::uint64_t seed = 0;
  // Completed edges in edge order. After a full run per_edge[i].edge == i.
  std::vector<EdgeRun> per_edge;
  double total_wall_time = 0.0;
  double generation_time = 0.0;
  OpCounters soft_counters;
  std::uint64_t bytes_read = 0;
  std::uint64_t bytes_written = 0;
  std::uint64_t work_items = 0;
  // Digest of every materialized node (sinks included).
  std::map<std::string, std::uint64_t> node_digests;
  std::map<std::string, Dataset> node_outputs;
  // Process I/O during execution, when the platform exposes it.
  std::optional<ProcessIo> process_io;

  const EdgeRun* find_edge(std::size_t edge) const noexcept;
};

// Thrown when an edge fails; carries the edge identity and the reports of the
// edges that completed.
class ExecutionError : public Error {
 public:
  ExecutionError(std::size_t edge, std::string label, const std::string& cause,
                 RunResult partial, std::exception_ptr nested);
  std::size_t edge() const noexcept { return edge_; }
  const std::string& label() const noexcept { return label_; }
  const RunResult& partial() const noexcept { return partial_; }
  const std::exception_ptr& cause() const noexcept { return cause_; }

 private:
  std::size_t edge_;
  std::string label_;
  RunResult partial_;
  std::exception_ptr cause_;
};

// Throws ValidationError listing the violations when validate() is not empty.
RunResult execute(const ProxyDag& dag, std::uint64_t seed, const ExecuteOptions& options = {});

// key=value line dump of a RunResult (node outputs are not stored).
void write_run_result(std::ostream& out, const RunResult& result);
RunResult read_run_result(std::istream& in);

}  // namespace dwarfproxy
