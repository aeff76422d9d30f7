#include <charconv>
#include <cstdio>
#include <sstream>

#include "dwarfproxy/proxydag.hpp"
#include "text_format.hpp"

namespace dwarfproxy {

namespace {

using detail::format_double;
using detail::parse_double;
using detail::parse_u64;

void write_counters(std::ostream& out, const OpCounters& c) {
  out << " integer_ops=" << c.integer_ops << " float_ops=" << c.float_ops << " loads=" << c.loads
      << " stores=" << c.stores << " branches=" << c.branches;
}

bool read_counter(OpCounters& c, std::string_view key, std::string_view v, std::size_t line) {
  std::uint64_t* field = nullptr;
  if (key == "integer_ops") field = &c.integer_ops;
  else if (key == "float_ops") field = &c.float_ops;
  else if (key == "loads") field = &c.loads;
  else if (key == "stores") field = &c.stores;
  else if (key == "branches") field = &c.branches;
  if (!field) return false;
  *field = parse_u64(v, line, key);
  return true;
}

std::string hex(std::uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t parse_hex(std::string_view v, std::size_t line, std::string_view what) {
  std::uint64_t x = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x, 16);
  if (ec != std::errc{} || ptr != v.data() + v.size() || v.empty()) {
    throw ParseError(line, std::string(what) + ": expected hex digits, got '" + std::string(v) + "'");
  }
  return x;
}

}  // namespace

void write_run_result(std::ostream& out, const RunResult& r) {
  out << "run proxy=" << r.proxy << " seed=" << r.seed
      << " total_wall_time=" << format_double(r.total_wall_time)
      << " generation_time=" << format_double(r.generation_time) << " bytes_read=" << r.bytes_read
      << " bytes_written=" << r.bytes_written << " work_items=" << r.work_items;
  write_counters(out, r.soft_counters);
  if (r.process_io) {
    out << " io_read=" << r.process_io->read_bytes << " io_write=" << r.process_io->write_bytes;
  }
  out << '\n';
  for (const auto& e : r.per_edge) {
    const auto& p = e.params;
    const auto& rep = e.report;
    out << "edge index=" << e.edge << " size=" << p.input_data_size << " chunk=" << p.chunk_size
        << " par=" << p.parallelism_degree << " weight=" << format_double(p.weight)
        << " start=" << format_double(e.start) << " finish=" << format_double(e.finish)
        << " wall_time=" << format_double(rep.wall_time) << " bytes_read=" << rep.bytes_read
        << " bytes_written=" << rep.bytes_written << " work_items=" << rep.work_items
        << " parallelism=" << rep.parallelism << " pad_count=" << rep.pad_count;
    write_counters(out, rep.soft_counters);
    out << " output_elements=" << e.output_elements << " output_digest=" << hex(e.output_digest)
        << " chunks=";
    for (std::size_t i = 0; i < rep.chunk_work_items.size(); ++i) {
      out << (i ? "," : "") << rep.chunk_work_items[i];
    }
    out << '\n';
    out << "label index=" << e.edge << ' ' << e.label << '\n';
  }
  for (const auto& [id, digest] : r.node_digests) {
    out << "node id=" << id << " digest=" << hex(digest) << '\n';
  }
}

RunResult read_run_result(std::istream& in) {
  RunResult r;
  std::string line;
  std::size_t line_no = 0;
  bool have_run = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tok = detail::tokenize(line);
    if (tok.empty()) continue;
    if (tok[0] == "label") {
      if (tok.size() < 2) throw ParseError(line_no, "expected 'label index=<n> <text>'");
      const auto [k, v] = detail::split_key_value(tok[1]);
      if (k != "index") throw ParseError(line_no, "label needs index=");
      const auto idx = parse_u64(v, line_no, "index");
      EdgeRun* e = nullptr;
      for (auto& run : r.per_edge) {
        if (run.edge == idx) e = &run;
      }
      if (!e) throw ParseError(line_no, "label for unknown edge " + std::to_string(idx));
      const auto pos = line.find(tok[1]) + tok[1].size();
      e->label = line.substr(std::min(line.size(), pos + 1));
      continue;
    }
    if (tok[0] == "run") {
      have_run = true;
      ProcessIo io;
      bool has_io = false;
      for (std::size_t i = 1; i < tok.size(); ++i) {
        const auto [k, v] = detail::split_key_value(tok[i]);
        if (read_counter(r.soft_counters, k, v, line_no)) continue;
        if (k == "proxy") r.proxy = std::string(v);
        else if (k == "seed") r.seed = parse_u64(v, line_no, k);
        else if (k == "total_wall_time") r.total_wall_time = parse_double(v, line_no, k);
        else if (k == "generation_time") r.generation_time = parse_double(v, line_no, k);
        else if (k == "bytes_read") r.bytes_read = parse_u64(v, line_no, k);
        else if (k == "bytes_written") r.bytes_written = parse_u64(v, line_no, k);
        else if (k == "work_items") r.work_items = parse_u64(v, line_no, k);
        else if (k == "io_read") { io.read_bytes = parse_u64(v, line_no, k); has_io = true; }
        else if (k == "io_write") { io.write_bytes = parse_u64(v, line_no, k); has_io = true; }
        else throw ParseError(line_no, "unknown run field '" + std::string(k) + "'");
      }
      if (has_io) r.process_io = io;
    } else if (tok[0] == "edge") {
      EdgeRun e;
      auto& p = e.params;
      auto& rep = e.report;
      for (std::size_t i = 1; i < tok.size(); ++i) {
        const auto [k, v] = detail::split_key_value(tok[i]);
        if (read_counter(rep.soft_counters, k, v, line_no)) continue;
        if (k == "index") e.edge = parse_u64(v, line_no, k);
        else if (k == "size") p.input_data_size = parse_u64(v, line_no, k);
        else if (k == "chunk") p.chunk_size = parse_u64(v, line_no, k);
        else if (k == "par") p.parallelism_degree = static_cast<std::uint32_t>(parse_u64(v, line_no, k));
        else if (k == "weight") p.weight = parse_double(v, line_no, k);
        else if (k == "start") e.start = parse_double(v, line_no, k);
        else if (k == "finish") e.finish = parse_double(v, line_no, k);
        else if (k == "wall_time") rep.wall_time = parse_double(v, line_no, k);
        else if (k == "bytes_read") rep.bytes_read = parse_u64(v, line_no, k);
        else if (k == "bytes_written") rep.bytes_written = parse_u64(v, line_no, k);
        else if (k == "work_items") rep.work_items = parse_u64(v, line_no, k);
        else if (k == "parallelism") rep.parallelism = static_cast<std::uint32_t>(parse_u64(v, line_no, k));
        else if (k == "pad_count") rep.pad_count = parse_u64(v, line_no, k);
        else if (k == "output_elements") e.output_elements = parse_u64(v, line_no, k);
        else if (k == "output_digest") e.output_digest = parse_hex(v, line_no, k);
        else if (k == "chunks") {
          std::string_view rest = v;
          while (!rest.empty()) {
            const auto comma = rest.find(',');
            rep.chunk_work_items.push_back(parse_u64(rest.substr(0, comma), line_no, k));
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
          }
        } else {
          throw ParseError(line_no, "unknown edge field '" + std::string(k) + "'");
        }
      }
      r.per_edge.push_back(std::move(e));
    } else if (tok[0] == "node") {
      std::string id;
      std::uint64_t digest = 0;
      for (std::size_t i = 1; i < tok.size(); ++i) {
        const auto [k, v] = detail::split_key_value(tok[i]);
        if (k == "id") id = std::string(v);
        else if (k == "digest") digest = parse_hex(v, line_no, k);
        else throw ParseError(line_no, "unknown node field '" + std::string(k) + "'");
      }
      if (id.empty()) throw ParseError(line_no, "node line needs id=");
      r.node_digests[id] = digest;
    } else {
      throw ParseError(line_no, "unknown record '" + std::string(tok[0]) + "'");
    }
  }
  if (!have_run) throw ParseError(line_no + 1, "missing 'run' record");
  return r;
}

}  // namespace dwarfproxy
