#include <fstream>
#include <set>
#include <sstream>

#include "dwarfproxy/proxydag.hpp"
#include "text_format.hpp"

namespace dwarfproxy {

namespace {

using detail::format_double;
using detail::parse_double;
using detail::parse_u64;

void write_spec(std::ostream& out, const DataSpec& s) {
  const DataSpec d{};
  out << " kind=" << to_string(s.kind);
  out << " size=" << (s.size == 0 ? std::string("auto") : std::to_string(s.size));
  out << " seed=" << s.seed;
  const bool numeric = s.kind == DataKind::Vector || s.kind == DataKind::Matrix;
  if (numeric || s.sparsity != d.sparsity) out << " sparsity=" << format_double(s.sparsity);
  if (numeric || s.value_range.lo != d.value_range.lo) out << " min=" << format_double(s.value_range.lo);
  if (numeric || s.value_range.hi != d.value_range.hi) out << " max=" << format_double(s.value_range.hi);
  if (numeric || s.distribution != d.distribution) out << " dist=" << to_string(s.distribution);
  if (numeric || s.dim != d.dim) out << " dim=" << s.dim;
  if (s.kind == DataKind::Graph || s.edge_factor != d.edge_factor) {
    out << " edge_factor=" << format_double(s.edge_factor);
  }
  if (s.kind == DataKind::Graph || s.graph_model != d.graph_model) {
    out << " graph=" << to_string(s.graph_model);
  }
  if (s.kind == DataKind::Text || s.record_bytes != d.record_bytes) {
    out << " record_bytes=" << s.record_bytes;
  }
}

std::uint32_t parse_u32(std::string_view v, std::size_t line, std::string_view what) {
  const auto x = parse_u64(v, line, what);
  if (x > 0xffffffffULL) throw ParseError(line, std::string(what) + ": value too large");
  return static_cast<std::uint32_t>(x);
}

// Converts library validation errors raised while decoding a token into
// line-numbered parse errors.
template <typename Fn>
auto at_line(std::size_t line, Fn&& fn) {
  try {
    return fn();
  } catch (const ValidationError& e) {
    throw ParseError(line, e.what());
  } catch (const LookupError& e) {
    throw ParseError(line, e.what());
  }
}

void parse_source_attr(DataSpec& s, std::string_view key, std::string_view v, std::size_t line) {
  if (key == "kind") s.kind = at_line(line, [&] { return parse_data_kind(v); });
  else if (key == "size") s.size = v == "auto" ? 0 : parse_u64(v, line, "size");
  else if (key == "seed") s.seed = parse_u64(v, line, "seed");
  else if (key == "sparsity") s.sparsity = parse_double(v, line, "sparsity");
  else if (key == "min") s.value_range.lo = parse_double(v, line, "min");
  else if (key == "max") s.value_range.hi = parse_double(v, line, "max");
  else if (key == "dist") s.distribution = at_line(line, [&] { return parse_distribution(v); });
  else if (key == "dim") s.dim = parse_u32(v, line, "dim");
  else if (key == "edge_factor") s.edge_factor = parse_double(v, line, "edge_factor");
  else if (key == "graph") s.graph_model = at_line(line, [&] { return parse_graph_model(v); });
  else if (key == "record_bytes") s.record_bytes = parse_u32(v, line, "record_bytes");
  else throw ParseError(line, "unknown source attribute '" + std::string(key) + "'");
}

void parse_edge_attr(KernelInvocation& inv, std::string_view key, std::string_view v,
                     std::size_t line) {
  auto& p = inv.params;
  auto& o = inv.options;
  if (key == "weight") p.weight = parse_double(v, line, "weight");
  else if (key == "chunk") p.chunk_size = parse_u64(v, line, "chunk");
  else if (key == "par") p.parallelism_degree = parse_u32(v, line, "par");
  else if (key == "fraction") o.fraction = parse_double(v, line, "fraction");
  else if (key == "bins") o.bins = parse_u32(v, line, "bins");
  else if (key == "hashes") o.hashes = parse_u32(v, line, "hashes");
  else if (key == "key") o.key = parse_u64(v, line, "key");
  else if (key == "centroids") o.centroids = parse_u32(v, line, "centroids");
  else throw ParseError(line, "unknown edge attribute '" + std::string(key) + "'");
}

}  // namespace

std::string serialize(const ProxyDag& dag) {
  std::ostringstream out;
  out << "proxy " << dag.name << '\n';
  out << "budget " << dag.total_work_budget << '\n';
  for (const auto& n : dag.nodes) {
    out << "node " << n.id << ' ' << to_string(n.role);
    if (n.role == NodeRole::Source) write_spec(out, n.spec);
    out << '\n';
  }
  const KernelOptions d{};
  for (const auto& e : dag.edges) {
    const auto& inv = e.invocation;
    const auto& p = inv.params;
    const auto& o = inv.options;
    out << "edge " << e.from << ' ' << e.to << ' ' << to_string(inv.dwarf) << ' ' << inv.variant
        << " weight=" << format_double(p.weight) << " chunk=" << p.chunk_size
        << " par=" << p.parallelism_degree;
    if (inv.spill_intermediate) out << " spill";
    if (o.fraction != d.fraction) out << " fraction=" << format_double(o.fraction);
    if (o.bins != d.bins) out << " bins=" << o.bins;
    if (o.hashes != d.hashes) out << " hashes=" << o.hashes;
    if (o.key != d.key) out << " key=" << o.key;
    if (o.centroids != d.centroids) out << " centroids=" << o.centroids;
    out << '\n';
  }
  return out.str();
}

ProxyDag parse_proxy(std::string_view document) {
  ProxyDag dag;
  bool have_name = false;
  bool have_budget = false;
  std::set<std::string> node_ids;

  detail::for_each_line(document, [&](std::size_t line, std::string_view text) {
    const auto tok = detail::tokenize(text);
    if (tok.empty()) return;
    const auto directive = tok[0];
    if (directive == "proxy") {
      if (tok.size() != 2) throw ParseError(line, "expected 'proxy <name>'");
      if (have_name) throw ParseError(line, "duplicate 'proxy' header");
      dag.name = std::string(tok[1]);
      have_name = true;
    } else if (directive == "budget") {
      if (tok.size() != 2) throw ParseError(line, "expected 'budget <N>'");
      if (have_budget) throw ParseError(line, "duplicate 'budget' line");
      dag.total_work_budget = parse_u64(tok[1], line, "budget");
      have_budget = true;
    } else if (directive == "node") {
      if (tok.size() < 3) throw ParseError(line, "expected 'node <id> <role> [attributes]'");
      ProxyNode node;
      node.id = std::string(tok[1]);
      node.role = at_line(line, [&] { return parse_node_role(tok[2]); });
      if (!node_ids.insert(node.id).second) {
        throw ParseError(line, "node '" + node.id + "' declared twice");
      }
      if (node.role != NodeRole::Source && tok.size() > 3) {
        throw ParseError(line, "only source nodes take attributes, got '" + std::string(tok[3]) + "'");
      }
      if (node.role == NodeRole::Source) {
        node.spec.size = 0;
        bool have_kind = false;
        std::set<std::string_view> seen;
        for (std::size_t i = 3; i < tok.size(); ++i) {
          const auto [key, value] = detail::split_key_value(tok[i]);
          if (key.empty()) throw ParseError(line, "expected key=value, got '" + std::string(tok[i]) + "'");
          if (!seen.insert(key).second) {
            throw ParseError(line, "attribute '" + std::string(key) + "' given twice");
          }
          parse_source_attr(node.spec, key, value, line);
          have_kind |= key == "kind";
        }
        if (!have_kind) throw ParseError(line, "source node '" + node.id + "' needs kind=");
      }
      dag.nodes.push_back(std::move(node));
    } else if (directive == "edge") {
      if (tok.size() < 5) {
        throw ParseError(line, "expected 'edge <from> <to> <dwarf> <variant> weight= chunk= par='");
      }
      ProxyEdge edge;
      edge.from = std::string(tok[1]);
      edge.to = std::string(tok[2]);
      auto& inv = edge.invocation;
      try {
        inv.dwarf = parse_dwarf(tok[3]);
      } catch (const LookupError&) {
        throw ParseError(line, "unknown dwarf '" + std::string(tok[3]) + "'");
      }
      inv.variant = std::string(tok[4]);
      if (!is_valid_variant(inv.dwarf, inv.variant)) {
        throw ParseError(line, "unknown " + std::string(to_string(inv.dwarf)) + " variant '" +
                                   inv.variant + "'");
      }
      std::set<std::string_view> seen;
      for (std::size_t i = 5; i < tok.size(); ++i) {
        if (tok[i] == "spill") {
          if (inv.spill_intermediate) throw ParseError(line, "'spill' given twice");
          inv.spill_intermediate = true;
          continue;
        }
        const auto [key, value] = detail::split_key_value(tok[i]);
        if (key.empty()) throw ParseError(line, "expected key=value or 'spill', got '" + std::string(tok[i]) + "'");
        if (!seen.insert(key).second) {
          throw ParseError(line, "attribute '" + std::string(key) + "' given twice");
        }
        parse_edge_attr(inv, key, value, line);
      }
      for (const char* required : {"weight", "chunk", "par"}) {
        if (!seen.count(required)) {
          throw ParseError(line, std::string("edge is missing ") + required + "=");
        }
      }
      dag.edges.push_back(std::move(edge));
    } else {
      throw ParseError(line, "unknown directive '" + std::string(directive) + "'");
    }
  });
  if (!have_name) throw ParseError(1, "missing 'proxy <name>' header");
  apply_budget(dag);
  return dag;
}

ProxyDag load_proxy_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open proxy definition '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_proxy(buf.str());
}

void save_proxy_file(const std::filesystem::path& path, const ProxyDag& dag) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << serialize(dag))) {
    throw IoError("cannot write proxy definition '" + path.string() + "'");
  }
}

}  // namespace dwarfproxy
