#include "dwarfproxy/proxydag.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <thread>

#include "dwarfproxy/random.hpp"
#include "text_format.hpp"

namespace dwarfproxy {

std::string_view to_string(NodeRole role) noexcept {
  switch (role) {
    case NodeRole::Source: return "source";
    case NodeRole::Intermediate: return "intermediate";
    case NodeRole::Sink: return "sink";
  }
  return "?";
}

NodeRole parse_node_role(std::string_view text) {
  if (text == "source") return NodeRole::Source;
  if (text == "intermediate") return NodeRole::Intermediate;
  if (text == "sink") return NodeRole::Sink;
  throw ValidationError("role", "unknown node role '" + std::string(text) +
                                    "' (expected source, intermediate or sink)");
}

const ProxyNode* ProxyDag::find_node(std::string_view id) const noexcept {
  for (const auto& n : nodes) {
    if (n.id == id) return &n;
  }
  return nullptr;
}

std::string Violation::to_string() const { return subject + ": " + rule + ": " + message; }

std::string edge_label(const ProxyDag& dag, std::size_t edge) {
  const auto& e = dag.edges.at(edge);
  return "e" + std::to_string(edge) + " " + e.from + "->" + e.to + " " +
         std::string(dwarfproxy::to_string(e.invocation.dwarf)) + "/" + e.invocation.variant;
}

std::uint64_t edge_input_size(const ProxyDag& dag, std::size_t edge) {
  const double w = dag.edges.at(edge).invocation.params.weight;
  const double n = std::round(w * static_cast<double>(dag.total_work_budget));
  return n < 1.0 ? 1 : static_cast<std::uint64_t>(n);
}

KernelParams effective_params(const ProxyDag& dag, std::size_t edge) {
  KernelParams p = dag.edges.at(edge).invocation.params;
  p.input_data_size = edge_input_size(dag, edge);
  p.chunk_size = std::clamp<std::uint64_t>(p.chunk_size, 1, p.input_data_size);
  return p;
}

void apply_budget(ProxyDag& dag) {
  for (std::size_t i = 0; i < dag.edges.size(); ++i) {
    dag.edges[i].invocation.params.input_data_size = edge_input_size(dag, i);
  }
}

std::vector<Violation> validate(const ProxyDag& dag) {
  std::vector<Violation> out;
  const auto add = [&](std::string subject, std::string rule, std::string message) {
    out.push_back({std::move(subject), std::move(rule), std::move(message)});
  };

  if (dag.name.empty()) add("dag", "name", "proxy name is empty");
  if (dag.total_work_budget < 1) add("dag", "budget", "total work budget must be at least 1");
  if (dag.edges.empty()) add("dag", "edges", "proxy has no edges");

  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < dag.nodes.size(); ++i) {
    const auto& n = dag.nodes[i];
    if (!index.emplace(n.id, i).second) add("node " + n.id, "duplicate", "node id declared twice");
    if (n.role == NodeRole::Source) {
      DataSpec probe = n.spec;
      if (probe.size == 0) probe.size = 1;
      try {
        probe.validate();
      } catch (const ValidationError& e) {
        add("node " + n.id, "dataspec", e.what());
      }
    }
  }

  std::vector<std::size_t> inbound(dag.nodes.size(), 0);
  std::vector<std::size_t> outbound(dag.nodes.size(), 0);
  std::vector<std::vector<std::size_t>> adjacency(dag.nodes.size());
  double weight_sum = 0.0;
  for (std::size_t i = 0; i < dag.edges.size(); ++i) {
    const auto& e = dag.edges[i];
    const std::string subject = "edge " + std::to_string(i);
    const auto from = index.find(e.from);
    const auto to = index.find(e.to);
    if (from == index.end()) add(subject, "unknown-node", "source node '" + e.from + "' is not declared");
    if (to == index.end()) add(subject, "unknown-node", "target node '" + e.to + "' is not declared");
    if (from != index.end() && to != index.end()) {
      ++outbound[from->second];
      ++inbound[to->second];
      adjacency[from->second].push_back(to->second);
    }
    const auto& inv = e.invocation;
    if (!is_valid_variant(inv.dwarf, inv.variant)) {
      add(subject, "variant",
          "'" + inv.variant + "' is not a " + std::string(to_string(inv.dwarf)) + " variant");
    }
    const auto& p = inv.params;
    if (!(p.weight > 0.0 && p.weight <= 1.0)) {
      add(subject, "weight", "weight " + detail::format_double(p.weight) + " is outside (0, 1]");
    }
    if (p.chunk_size < 1) add(subject, "chunk", "chunk size must be at least 1");
    if (p.parallelism_degree < 1) add(subject, "parallelism", "parallelism degree must be at least 1");
    if (inv.dwarf == Dwarf::Sampling && !(inv.options.fraction > 0.0 && inv.options.fraction <= 1.0)) {
      add(subject, "fraction", "sampling fraction must be in (0, 1]");
    }
    weight_sum += p.weight;
  }
  if (!dag.edges.empty() && std::abs(weight_sum - 1.0) > 1e-9) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", weight_sum);
    add("dag", "weights", std::string("weights sum ") + buf);
  }

  for (std::size_t i = 0; i < dag.nodes.size(); ++i) {
    const auto& n = dag.nodes[i];
    const std::string subject = "node " + n.id;
    if (n.role == NodeRole::Source && inbound[i] > 0) {
      add(subject, "source-inbound", "source nodes cannot have inbound edges");
    }
    if (n.role == NodeRole::Source && outbound[i] == 0) {
      add(subject, "isolated", "source node feeds no edge");
    }
    if (n.role != NodeRole::Source && inbound[i] == 0) {
      add(subject, "no-inbound", "non-source node has no inbound edge");
    }
    if (n.role == NodeRole::Sink && outbound[i] > 0) {
      add(subject, "sink-outbound", "sink nodes cannot have outgoing edges");
    }
  }

  // Cycle detection: DFS keeping the current path.
  std::vector<int> color(dag.nodes.size(), 0);
  std::vector<std::size_t> path;
  std::set<std::string> reported;
  std::function<void(std::size_t)> visit = [&](std::size_t v) {
    color[v] = 1;
    path.push_back(v);
    for (const auto w : adjacency[v]) {
      if (color[w] == 1) {
        const auto start = std::find(path.begin(), path.end(), w);
        std::string cyc;
        for (auto it = start; it != path.end(); ++it) cyc += dag.nodes[*it].id + "->";
        cyc += dag.nodes[w].id;
        if (reported.insert(cyc).second) add("dag", "cycle", "cycle: " + cyc);
      } else if (color[w] == 0) {
        visit(w);
      }
    }
    path.pop_back();
    color[v] = 2;
  };
  for (std::size_t v = 0; v < dag.nodes.size(); ++v) {
    if (color[v] == 0) visit(v);
  }

  for (std::size_t i = 0; i < dag.edges.size() && dag.total_work_budget >= 1; ++i) {
    const double n = std::round(dag.edges[i].invocation.params.weight *
                                static_cast<double>(dag.total_work_budget));
    if (dag.edges[i].invocation.params.weight > 0.0 && n < 1.0) {
      add("edge " + std::to_string(i), "budget", "weight x budget rounds to zero elements");
    }
  }
  return out;
}

namespace {

std::string spec_key(const DataSpec& s) {
  std::ostringstream k;
  k << static_cast<int>(s.kind) << '|' << s.size << '|' << detail::format_double(s.sparsity) << '|'
    << detail::format_double(s.edge_factor) << '|' << s.seed << '|'
    << detail::format_double(s.value_range.lo) << '|' << detail::format_double(s.value_range.hi)
    << '|' << static_cast<int>(s.distribution) << '|' << static_cast<int>(s.graph_model) << '|'
    << s.record_bytes << '|' << s.dim;
  return k.str();
}

std::uint64_t combine_digests(const std::vector<std::uint64_t>& parts) {
  if (parts.size() == 1) return parts.front();
  std::uint64_t h = 0x243f6a8885a308d3ULL;
  for (const auto d : parts) h = mix64(h ^ d);
  return h;
}

}  // namespace

std::shared_ptr<const Dataset> DatasetCache::get(const DataSpec& spec) {
  const auto key = spec_key(spec);
  {
    std::lock_guard lock(mutex_);
    if (const auto it = entries_.find(key); it != entries_.end()) return it->second;
  }
  auto data = std::make_shared<const Dataset>(generate(spec));
  std::lock_guard lock(mutex_);
  return entries_.emplace(key, std::move(data)).first->second;
}

std::size_t DatasetCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

void DatasetCache::clear() {
  std::lock_guard lock(mutex_);
  entries_.clear();
}

std::optional<ProcessIo> read_process_io() {
  std::ifstream in("/proc/self/io");
  if (!in) return std::nullopt;
  ProcessIo io;
  bool seen_r = false;
  bool seen_w = false;
  std::string key;
  std::uint64_t value = 0;
  while (in >> key >> value) {
    if (key == "rchar:") {
      io.read_bytes = value;
      seen_r = true;
    } else if (key == "wchar:") {
      io.write_bytes = value;
      seen_w = true;
    }
  }
  if (!seen_r || !seen_w) return std::nullopt;
  return io;
}

const EdgeRun* RunResult::find_edge(std::size_t edge) const noexcept {
  for (const auto& r : per_edge) {
    if (r.edge == edge) return &r;
  }
  return nullptr;
}

ExecutionError::ExecutionError(std::size_t edge, std::string label, const std::string& cause,
                               RunResult partial, std::exception_ptr nested)
    : Error(label + ": " + cause),
      edge_(edge),
      label_(std::move(label)),
      partial_(std::move(partial)),
      cause_(std::move(nested)) {}

namespace {

using Clock = std::chrono::steady_clock;

struct NodeState {
  std::shared_ptr<const Dataset> data;
  // One slot per inbound edge, in edge order.
  std::vector<std::size_t> inbound_edges;
  std::vector<std::shared_ptr<const Dataset>> inputs;
  std::size_t pending_in = 0;
  std::size_t pending_out = 0;
  bool ready = false;
};

struct Completion {
  std::size_t edge = 0;
  std::optional<KernelResult> result;
  std::exception_ptr error;
  Clock::time_point finish;
};

void finalize_aggregates(RunResult& r) {
  std::sort(r.per_edge.begin(), r.per_edge.end(),
            [](const EdgeRun& a, const EdgeRun& b) { return a.edge < b.edge; });
  r.soft_counters = {};
  r.bytes_read = r.bytes_written = r.work_items = 0;
  for (const auto& e : r.per_edge) {
    r.soft_counters += e.report.soft_counters;
    r.bytes_read += e.report.bytes_read;
    r.bytes_written += e.report.bytes_written;
    r.work_items += e.report.work_items;
  }
}

}  // namespace

RunResult execute(const ProxyDag& dag, std::uint64_t seed, const ExecuteOptions& options) {
  if (const auto violations = validate(dag); !violations.empty()) {
    std::string msg = "proxy '" + dag.name + "' is invalid:";
    for (const auto& v : violations) msg += "\n  " + v.to_string();
    throw ValidationError("dag", msg);
  }

  const auto t0 = Clock::now();
  const auto since = [&](Clock::time_point t) { return std::chrono::duration<double>(t - t0).count(); };
  const auto io_before = read_process_io();
  const auto spill_root = options.spill_root.value_or(default_spill_root());

  RunResult result;
  result.proxy = dag.name;
  result.seed = seed;

  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < dag.nodes.size(); ++i) index.emplace(dag.nodes[i].id, i);
  std::vector<NodeState> nodes(dag.nodes.size());
  std::vector<KernelParams> params(dag.edges.size());
  std::vector<std::uint64_t> demand(dag.nodes.size(), 0);
  for (std::size_t i = 0; i < dag.edges.size(); ++i) {
    const auto& e = dag.edges[i];
    params[i] = effective_params(dag, i);
    auto& to = nodes[index.at(e.to)];
    to.inbound_edges.push_back(i);
    ++to.pending_in;
    const auto from = index.at(e.from);
    ++nodes[from].pending_out;
    demand[from] = std::max(demand[from], params[i].input_data_size);
  }
  for (auto& n : nodes) n.inputs.resize(n.inbound_edges.size());

  const auto record_node = [&](std::size_t v, const std::shared_ptr<const Dataset>& data) {
    result.node_digests[dag.nodes[v].id] = data->digest();
    if (options.retain_outputs) result.node_outputs.emplace(dag.nodes[v].id, *data);
  };

  for (std::size_t v = 0; v < dag.nodes.size(); ++v) {
    const auto& node = dag.nodes[v];
    if (node.role != NodeRole::Source) continue;
    DataSpec spec = node.spec;
    if (spec.size == 0) spec.size = std::bit_ceil(demand[v]);
    spec.seed = split_seed(spec.seed, seed);
    nodes[v].data = options.cache ? options.cache->get(spec)
                                  : std::make_shared<const Dataset>(generate(spec));
    nodes[v].ready = true;
    record_node(v, nodes[v].data);
  }
  result.generation_time = since(Clock::now());

  std::mutex mutex;
  std::condition_variable cv;
  std::deque<Completion> done;
  std::vector<std::jthread> workers;
  std::vector<bool> started(dag.edges.size(), false);
  std::vector<double> start_times(dag.edges.size(), 0.0);
  std::size_t running = 0;
  std::exception_ptr failure;
  std::size_t failed_edge = 0;

  const auto run_edge = [&](std::size_t i, std::shared_ptr<const Dataset> input) {
    Completion c;
    c.edge = i;
    try {
      const auto& e = dag.edges[i];
      KernelInvocation inv = e.invocation;
      inv.params = params[i];
      const std::uint64_t n = inv.params.input_data_size;
      const std::uint64_t kernel_seed = split_seed(seed, 0x10000 + i);
      if (inv.dwarf == Dwarf::Set) {
        const std::uint64_t na = (n + 1) / 2;
        const Dataset a = slice_cyclic(*input, 0, na);
        const Dataset b = n > na ? slice_cyclic(*input, na, n - na) : a;
        c.result = run_kernel(inv, a, &b, kernel_seed, spill_root);
      } else if (input->element_count() >= n) {
        c.result = run_kernel(inv, *input, nullptr, kernel_seed, spill_root);
      } else {
        const Dataset sliced = slice_cyclic(*input, 0, n);
        c.result = run_kernel(inv, sliced, nullptr, kernel_seed, spill_root);
      }
    } catch (...) {
      c.error = std::current_exception();
    }
    c.finish = Clock::now();
    {
      std::lock_guard lock(mutex);
      done.push_back(std::move(c));
    }
    cv.notify_one();
  };

  const auto materialize = [&](std::size_t v) {
    auto& st = nodes[v];
    std::vector<std::uint64_t> digests;
    for (const auto& in : st.inputs) digests.push_back(in->digest());
    if (dag.nodes[v].role == NodeRole::Sink) {
      result.node_digests[dag.nodes[v].id] = combine_digests(digests);
      if (options.retain_outputs) {
        std::vector<Dataset> parts;
        for (const auto& in : st.inputs) parts.push_back(*in);
        try {
          result.node_outputs.emplace(dag.nodes[v].id, concatenate(parts));
        } catch (const Error&) {
          result.node_outputs.emplace(dag.nodes[v].id, parts.front());
        }
      }
      st.inputs.clear();
      return;
    }
    if (st.inputs.size() == 1) {
      st.data = st.inputs.front();
    } else {
      std::vector<Dataset> parts;
      for (const auto& in : st.inputs) parts.push_back(*in);
      st.data = std::make_shared<const Dataset>(concatenate(parts));
    }
    st.inputs.clear();
    st.ready = true;
    record_node(v, st.data);
  };

  while (true) {
    if (!failure) {
      for (std::size_t i = 0; i < dag.edges.size(); ++i) {
        if (started[i]) continue;
        const auto from = index.at(dag.edges[i].from);
        if (!nodes[from].ready) continue;
        started[i] = true;
        start_times[i] = since(Clock::now());
        ++running;
        if (options.serial) {
          run_edge(i, nodes[from].data);
        } else {
          workers.emplace_back(run_edge, i, nodes[from].data);
        }
      }
    }
    if (running == 0) break;

    Completion c;
    {
      std::unique_lock lock(mutex);
      cv.wait(lock, [&] { return !done.empty(); });
      c = std::move(done.front());
      done.pop_front();
    }
    --running;
    const auto& e = dag.edges[c.edge];
    if (c.error) {
      if (!failure) {
        failure = c.error;
        failed_edge = c.edge;
      }
      continue;
    }
    EdgeRun run;
    run.edge = c.edge;
    run.label = edge_label(dag, c.edge);
    run.params = params[c.edge];
    run.report = std::move(c.result->report);
    run.start = start_times[c.edge];
    run.finish = since(c.finish);
    run.output_elements = c.result->output.element_count();
    auto output = std::make_shared<const Dataset>(std::move(c.result->output));
    run.output_digest = output->digest();
    result.per_edge.push_back(std::move(run));

    const auto from = index.at(e.from);
    if (--nodes[from].pending_out == 0 && !options.retain_outputs) nodes[from].data.reset();
    const auto to = index.at(e.to);
    auto& target = nodes[to];
    const auto slot = std::find(target.inbound_edges.begin(), target.inbound_edges.end(), c.edge) -
                      target.inbound_edges.begin();
    target.inputs[static_cast<std::size_t>(slot)] = std::move(output);
    if (--target.pending_in == 0 && !failure) {
      try {
        materialize(to);
      } catch (...) {
        failure = std::current_exception();
        failed_edge = c.edge;
      }
    }
  }
  workers.clear();

  result.total_wall_time = std::max(since(Clock::now()), 1e-9);
  if (const auto io_after = read_process_io(); io_before && io_after) {
    result.process_io = ProcessIo{io_after->read_bytes - io_before->read_bytes,
                                  io_after->write_bytes - io_before->write_bytes};
  }
  finalize_aggregates(result);

  if (failure) {
    std::string cause;
    try {
      std::rethrow_exception(failure);
    } catch (const std::exception& ex) {
      cause = ex.what();
    } catch (...) {
      cause = "unknown error";
    }
    throw ExecutionError(failed_edge, edge_label(dag, failed_edge), cause, std::move(result),
                         failure);
  }
  return result;
}

}  // namespace dwarfproxy
