#include "dwarfproxy/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "text_format.hpp"

namespace dwarfproxy {

namespace {

constexpr std::array<std::string_view, 18> kNames = {
    "ipc",         "mips",         "ratio_integer", "ratio_float",  "ratio_load",   "ratio_store",
    "ratio_branch", "branch_miss", "l1i_hit",       "l1d_hit",      "l2_hit",       "l3_hit",
    "mem_read_bw", "mem_write_bw", "mem_total_bw",  "disk_io_bw",   "runtime",      "soft_mips",
};

constexpr std::array<std::string_view, 5> kMix = {"ratio_integer", "ratio_float", "ratio_load",
                                                  "ratio_store", "ratio_branch"};

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

}  // namespace

std::span<const std::string_view> metric_names() noexcept { return kNames; }
std::span<const std::string_view> mix_metric_names() noexcept { return kMix; }

bool is_metric_name(std::string_view name) noexcept {
  return std::find(kNames.begin(), kNames.end(), name) != kNames.end();
}

bool is_fraction_metric(std::string_view name) noexcept {
  return name.starts_with("ratio_") || name.ends_with("_hit") || name == "branch_miss";
}

void MetricVector::set(std::string_view name, double value) {
  if (!is_metric_name(name)) throw LookupError("unknown metric '" + std::string(name) + "'");
  const std::string n(name);
  if (!std::isfinite(value)) throw RangeError(n, "value must be finite");
  if (is_fraction_metric(name) && (value < 0.0 || value > 1.0)) {
    throw RangeError(n, "value " + detail::format_double(value) + " is outside [0, 1]");
  }
  if (name == "runtime" && value <= 0.0) {
    throw RangeError(n, "runtime must be positive, got " + detail::format_double(value));
  }
  if (value < 0.0) throw RangeError(n, "value " + detail::format_double(value) + " is negative");
  values_[n] = value;
}

std::optional<double> MetricVector::get(std::string_view name) const {
  const auto it = values_.find(std::string(name));
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

void MetricVector::validate() const {
  double sum = 0.0;
  for (const auto m : kMix) sum += get(m).value_or(0.0);
  if (sum > 1.0 + 1e-6) {
    throw RangeError("ratio_*", "instruction-mix ratios sum to " + detail::format_double(sum));
  }
}

bool AccuracyReport::has_negative() const {
  return std::any_of(per_metric.begin(), per_metric.end(), [](const auto& kv) { return kv.second < 0.0; });
}

double relative_deviation(std::string_view metric, double target, double proxy) {
  if (target == 0.0) throw DivisionHazardError(std::string(metric));
  return std::abs((proxy - target) / target);
}

AccuracyReport accuracy(const MetricVector& target, const MetricVector& proxy) {
  AccuracyReport r;
  double sum = 0.0;
  for (const auto name : kNames) {
    const auto t = target.get(name);
    const auto p = proxy.get(name);
    if (t && p) {
      const double a = 1.0 - relative_deviation(name, *t, *p);
      r.per_metric.emplace(std::string(name), a);
      sum += a;
    } else if (t || p) {
      r.absent.emplace_back(name);
    }
  }
  if (!r.per_metric.empty()) r.mean = sum / static_cast<double>(r.per_metric.size());
  return r;
}

double disk_bandwidth(const IoSample& s) {
  if (!(s.runtime > 0.0)) throw ValidationError("runtime", "must be positive");
  if (s.sectors_read < 0 || s.sectors_written < 0) {
    throw ValidationError("sectors", "sector counts must be non-negative");
  }
  if (!(s.sector_size > 0.0)) throw ValidationError("sector_size", "must be positive");
  return (s.sectors_read + s.sectors_written) * s.sector_size / s.runtime;
}

IoSample io_sample_from_bytes(std::uint64_t bytes_read, std::uint64_t bytes_written,
                              double runtime, double sector_size) {
  IoSample s;
  s.sector_size = sector_size;
  s.sectors_read = std::ceil(static_cast<double>(bytes_read) / sector_size);
  s.sectors_written = std::ceil(static_cast<double>(bytes_written) / sector_size);
  s.runtime = runtime;
  return s;
}

double speedup(double time_a, double time_b) {
  if (!(time_a > 0.0)) throw ValidationError("time_a", "must be positive");
  if (!(time_b > 0.0)) throw ValidationError("time_b", "must be positive");
  return time_b / time_a;
}

MetricVector ingest_counters(std::string_view document) {
  MetricVector v;
  std::set<std::string> seen;
  detail::for_each_line(document, [&](std::size_t line, std::string_view text) {
    const auto tok = detail::tokenize(text);
    if (tok.empty()) return;
    if (tok.size() != 2) {
      throw ParseError(line, "expected '<metric> <value>', got " + std::to_string(tok.size()) + " fields");
    }
    const std::string name(tok[0]);
    if (!is_metric_name(name)) throw ParseError(line, "unknown metric '" + name + "'");
    if (!seen.insert(name).second) throw ParseError(line, "metric '" + name + "' given twice");
    const double value = detail::parse_double(tok[1], line, name);
    try {
      v.set(name, value);
    } catch (const RangeError& e) {
      throw RangeError(name, "line " + std::to_string(line) + ": " +
                                 std::string(e.what()).substr(name.size() + 2));
    }
  });
  v.validate();
  return v;
}

std::string emit_counters(const MetricVector& metrics) {
  std::string out;
  for (const auto name : kNames) {
    if (const auto value = metrics.get(name)) {
      out += std::string(name) + " " + detail::format_double(*value) + "\n";
    }
  }
  return out;
}

MetricVector load_counter_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open counter file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return ingest_counters(buf.str());
}

void save_counter_file(const std::filesystem::path& path, const MetricVector& metrics) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << emit_counters(metrics))) {
    throw IoError("cannot write counter file '" + path.string() + "'");
  }
}

double modeled_edge_time(const EdgeRun& edge, const CostModel& m) {
  const auto& r = edge.report;
  const double chunks = static_cast<double>(std::max<std::size_t>(1, r.chunk_work_items.size()));
  const double par = std::max<double>(1.0, edge.params.parallelism_degree);
  const double eff = std::min(par, chunks);
  return static_cast<double>(r.soft_counters.total()) / (m.op_rate * eff) +
         chunks * m.chunk_overhead / eff + par * m.spawn_cost +
         static_cast<double>(r.bytes_read + r.bytes_written) / m.disk_rate;
}

double modeled_runtime(const RunResult& run, const CostModel& model) {
  double t = 0.0;
  for (const auto& e : run.per_edge) t += modeled_edge_time(e, model);
  return std::max(t, 1e-12);
}

MetricVector software_metrics(const RunResult& run, SoftwareClock clock, const CostModel& model) {
  MetricVector v;
  const double runtime = clock == SoftwareClock::Modeled ? modeled_runtime(run, model)
                                                         : std::max(run.total_wall_time, 1e-9);
  v.set("runtime", runtime);
  v.set("disk_io_bw", disk_bandwidth(io_sample_from_bytes(run.bytes_read, run.bytes_written, runtime)));
  const auto& c = run.soft_counters;
  const double total = static_cast<double>(c.total());
  v.set("soft_mips", total / runtime / 1e6);
  if (total > 0.0) {
    v.set("ratio_integer", static_cast<double>(c.integer_ops) / total);
    v.set("ratio_float", static_cast<double>(c.float_ops) / total);
    v.set("ratio_load", static_cast<double>(c.loads) / total);
    v.set("ratio_store", static_cast<double>(c.stores) / total);
    v.set("ratio_branch", static_cast<double>(c.branches) / total);
  }
  return v;
}

std::optional<double> process_disk_bandwidth(const RunResult& run) {
  if (!run.process_io) return std::nullopt;
  return disk_bandwidth(io_sample_from_bytes(run.process_io->read_bytes, run.process_io->write_bytes,
                                             std::max(run.total_wall_time, 1e-9)));
}

std::string render_accuracy_table(const AccuracyReport& report) {
  std::ostringstream out;
  char buf[128];
  std::snprintf(buf, sizeof buf, "%-14s %10s\n", "metric", "accuracy");
  out << buf;
  for (const auto& [name, a] : report.per_metric) {
    std::snprintf(buf, sizeof buf, "%-14s %10.4f%s\n", name.c_str(), a, a < 0.0 ? "  (negative)" : "");
    out << buf;
  }
  if (report.mean) {
    std::snprintf(buf, sizeof buf, "%-14s %10.4f\n", "mean", *report.mean);
    out << buf;
  } else {
    out << "mean           (no shared metrics)\n";
  }
  if (!report.absent.empty()) {
    out << "absent:";
    for (const auto& n : report.absent) out << ' ' << n;
    out << '\n';
  }
  return out.str();
}

std::string render_accuracy_csv(const AccuracyReport& report) {
  std::string out = "metric,accuracy\n";
  for (const auto& [name, a] : report.per_metric) out += name + "," + detail::format_double(a) + "\n";
  if (report.mean) out += "mean," + detail::format_double(*report.mean) + "\n";
  for (const auto& n : report.absent) out += n + ",absent\n";
  return out;
}

std::string render_metric_table(const MetricVector& metrics) {
  std::ostringstream out;
  char buf[128];
  for (const auto name : kNames) {
    if (const auto v = metrics.get(name)) {
      std::snprintf(buf, sizeof buf, "%-14s %16.6g\n", std::string(name).c_str(), *v);
      out << buf;
    }
  }
  return out.str();
}

std::string render_speedup_table(std::span<const SpeedupRow> rows) {
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-16s %12s %12s %10s\n", "label", "time_a", "time_b", "speedup");
  out << buf;
  for (const auto& r : rows) {
    const double s = speedup(r.time_a, r.time_b);
    std::snprintf(buf, sizeof buf, "%-16s %12.6g %12.6g %10s\n", r.label.c_str(), r.time_a, r.time_b,
                  (fmt("%.1f", s) + "x").c_str());
    out << buf;
  }
  return out.str();
}

std::string render_speedup_csv(std::span<const SpeedupRow> rows) {
  std::string out = "label,time_a,time_b,speedup\n";
  for (const auto& r : rows) {
    out += r.label + "," + detail::format_double(r.time_a) + "," + detail::format_double(r.time_b) +
           "," + detail::format_double(speedup(r.time_a, r.time_b)) + "\n";
  }
  return out;
}

}  // namespace dwarfproxy
