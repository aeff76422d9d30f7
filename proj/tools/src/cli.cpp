#include "cli.hpp"

#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dwarfproxy/autotune.hpp"
#include "dwarfproxy/datagen.hpp"
#include "dwarfproxy/error.hpp"
#include "dwarfproxy/kernels.hpp"
#include "dwarfproxy/metrics.hpp"
#include "dwarfproxy/proxydag.hpp"
#include "dwarfproxy/random.hpp"

namespace dwarfproxy::cli {

namespace {

namespace fs = std::filesystem;

// Failure with a chosen exit status.
class CliError : public std::runtime_error {
 public:
  CliError(int code, const std::string& message) : std::runtime_error(message), code_(code) {}
  int code() const noexcept { return code_; }

 private:
  int code_;
};

// Prefixes parse diagnostics with the offending file.
template <typename Fn>
auto from_file(const std::string& path, Fn&& fn) {
  try {
    return fn();
  } catch (const ParseError& e) {
    throw CliError(kExitUsage, path + ": " + e.what());
  } catch (const RangeError& e) {
    throw CliError(kExitUsage, path + ": " + e.what());
  }
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text)) throw IoError("cannot write '" + path + "'");
}

// A definition argument is a file path or the name of a reference proxy.
ProxyDag load_definition(const std::string& arg) {
  std::error_code ec;
  if (fs::is_regular_file(arg, ec)) {
    return from_file(arg, [&] { return load_proxy_file(arg); });
  }
  for (const auto name : reference_names()) {
    if (name == arg) return load_reference(name);
  }
  throw CliError(kExitUsage, "'" + arg + "' is neither a file nor a reference proxy name");
}

MetricVector load_counters(const std::string& path) {
  return from_file(path, [&] { return load_counter_file(path); });
}

SoftwareClock parse_clock(const std::string& text) {
  return text == "wall" ? SoftwareClock::Wall : SoftwareClock::Modeled;
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string hex64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string render_report(const KernelReport& r) {
  std::ostringstream out;
  out << "wall_time " << r.wall_time << "\nwork_items " << r.work_items << "\nbytes_read "
      << r.bytes_read << "\nbytes_written " << r.bytes_written << "\nparallelism " << r.parallelism
      << "\nchunks " << r.chunk_work_items.size() << "\npad_count " << r.pad_count
      << "\ninteger_ops " << r.soft_counters.integer_ops << "\nfloat_ops "
      << r.soft_counters.float_ops << "\nloads " << r.soft_counters.loads << "\nstores "
      << r.soft_counters.stores << "\nbranches " << r.soft_counters.branches << "\n";
  return out.str();
}

std::string render_run(const RunResult& r) {
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-44s %10s %8s %5s %12s %10s\n", "edge", "size", "chunk", "par",
                "work_items", "wall_s");
  out << buf;
  for (const auto& e : r.per_edge) {
    std::snprintf(buf, sizeof buf, "%-44s %10llu %8llu %5u %12llu %10.4f\n", e.label.c_str(),
                  static_cast<unsigned long long>(e.params.input_data_size),
                  static_cast<unsigned long long>(e.params.chunk_size), e.params.parallelism_degree,
                  static_cast<unsigned long long>(e.report.work_items), e.report.wall_time);
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "total: work_items=%llu wall=%.4fs generation=%.4fs bytes_read=%llu bytes_written=%llu\n",
                static_cast<unsigned long long>(r.work_items), r.total_wall_time,
                r.generation_time, static_cast<unsigned long long>(r.bytes_read),
                static_cast<unsigned long long>(r.bytes_written));
  out << buf;
  return out.str();
}

std::vector<SpeedupRow> speedup_rows(const MetricVector& target, const MetricVector& proxy,
                                     std::optional<double> target_time,
                                     std::optional<double> proxy_time, const std::string& label) {
  const auto t = target_time ? target_time : target.get("runtime");
  const auto p = proxy_time ? proxy_time : proxy.get("runtime");
  if (!t || !p) return {};
  // speedup(a, b) = b / a: the proxy is the fast side.
  return {SpeedupRow{label, *p, *t}};
}

// --- datagen ---------------------------------------------------------------

struct DatagenArgs {
  std::string kind;
  std::uint64_t size = 0;
  std::uint64_t seed = 0;
  double sparsity = 0.0;
  double lo = 0.0;
  double hi = 1.0;
  std::string dist = "uniform";
  std::uint32_t dim = 1;
  double edge_factor = 4.0;
  std::string graph = "power_law";
  std::uint32_t record_bytes = 100;
  std::string output;
};

int cmd_datagen(const DatagenArgs& a, std::ostream& out) {
  DataSpec spec;
  spec.kind = parse_data_kind(a.kind);
  spec.size = a.size;
  spec.seed = a.seed;
  spec.sparsity = a.sparsity;
  spec.value_range = {a.lo, a.hi};
  spec.distribution = parse_distribution(a.dist);
  spec.dim = a.dim;
  spec.edge_factor = a.edge_factor;
  spec.graph_model = parse_graph_model(a.graph);
  spec.record_bytes = a.record_bytes;
  spec.validate();
  const auto data = generate(spec);
  save_dataset(a.output, data);
  out << "wrote " << a.output << ": kind=" << to_string(spec.kind)
      << " elements=" << data.element_count() << " digest=" << hex64(data.digest());
  if (spec.kind == DataKind::Vector || spec.kind == DataKind::Matrix) {
    out << " zero_fraction=" << fmt("%.6f", zero_fraction(data));
  }
  out << "\n";
  return kExitOk;
}

// --- kernel run ------------------------------------------------------------

struct KernelArgs {
  std::string dwarf;
  std::string variant;
  std::string input;
  std::string input_b;
  std::optional<std::uint64_t> size;
  std::uint64_t chunk = 4096;
  std::uint32_t par = 1;
  std::uint64_t seed = 0;
  bool spill = false;
  KernelOptions options;
  std::string output;
};

int cmd_kernel_run(const KernelArgs& a, std::ostream& out) {
  const auto input = from_file(a.input, [&] { return load_dataset(a.input); });
  std::optional<Dataset> b;
  if (!a.input_b.empty()) b = from_file(a.input_b, [&] { return load_dataset(a.input_b); });
  KernelInvocation inv;
  inv.dwarf = parse_dwarf(a.dwarf);
  inv.variant = a.variant;
  inv.params.input_data_size = a.size.value_or(input.element_count() + (b ? b->element_count() : 0));
  inv.params.chunk_size = a.chunk;
  inv.params.parallelism_degree = a.par;
  inv.spill_intermediate = a.spill;
  inv.options = a.options;
  inv.validate();
  const auto result = run_kernel(inv, input, b ? &*b : nullptr, a.seed);
  if (!a.output.empty()) save_dataset(a.output, result.output);
  out << "kernel " << to_string(inv.dwarf) << "/" << inv.variant << "\n"
      << "output_elements " << result.output.element_count() << "\noutput_digest "
      << hex64(result.output.digest()) << "\n"
      << render_report(result.report);
  return kExitOk;
}

// --- proxy -----------------------------------------------------------------

int cmd_proxy_validate(const std::string& def, std::ostream& out, std::ostream& err) {
  const auto dag = load_definition(def);
  const auto violations = validate(dag);
  if (violations.empty()) {
    out << "ok: " << dag.name << " (" << dag.nodes.size() << " nodes, " << dag.edges.size()
        << " edges, budget " << dag.total_work_budget << ")\n";
    return kExitOk;
  }
  for (const auto& v : violations) err << def << ": " << v.to_string() << "\n";
  return kExitUsage;
}

struct ProxyRunArgs {
  std::string def;
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> budget;
  bool serial = false;
  std::string clock = "modeled";
  std::string result;
  std::string metrics;
  bool quiet = false;
};

int cmd_proxy_run(const ProxyRunArgs& a, std::ostream& out) {
  auto dag = load_definition(a.def);
  if (a.budget) {
    dag.total_work_budget = *a.budget;
    apply_budget(dag);
  }
  ExecuteOptions opts;
  opts.serial = a.serial;
  const auto run = execute(dag, a.seed, opts);
  const auto metrics = software_metrics(run, parse_clock(a.clock));
  if (!a.result.empty()) {
    std::ofstream f(a.result, std::ios::binary | std::ios::trunc);
    write_run_result(f, run);
    if (!f) throw IoError("cannot write '" + a.result + "'");
  }
  if (!a.metrics.empty()) save_counter_file(a.metrics, metrics);
  if (!a.quiet) {
    out << "proxy " << dag.name << " seed=" << a.seed << " budget=" << dag.total_work_budget << "\n"
        << render_run(run) << "\nmetrics (" << a.clock << " clock)\n"
        << render_metric_table(metrics);
    if (const auto bw = process_disk_bandwidth(run)) {
      out << "process_disk_io_bw " << fmt("%.6g", *bw) << "\n";
    }
  }
  return kExitOk;
}

// --- tune ------------------------------------------------------------------

struct TuneArgs {
  std::string def;
  std::string target;
  std::optional<std::uint64_t> hint_size;
  std::optional<std::uint64_t> hint_chunk;
  std::optional<std::uint32_t> hint_par;
  TuningConfig config;
  std::string clock = "modeled";
  std::string command;
  std::string work_dir;
  std::string output;
  std::string log;
  bool quiet = false;
};

int cmd_tune(TuneArgs a, std::ostream& out, std::ostream& err) {
  auto dag = load_definition(a.def);
  const auto target = load_counters(a.target);
  a.config.validate();
  if (a.hint_size || a.hint_chunk || a.hint_par) {
    auto st = initialize(dag, target, {a.hint_size, a.hint_chunk, a.hint_par});
    for (const auto& w : st.warnings) err << "warning: " << w << "\n";
    dag = std::move(st.dag);
  }
  const auto problems = validate(dag);
  if (!problems.empty()) {
    for (const auto& v : problems) err << a.def << ": " << v.to_string() << "\n";
    return kExitUsage;
  }

  std::unique_ptr<MetricSource> source;
  if (!a.command.empty()) {
    const fs::path dir = a.work_dir.empty() ? fs::temp_directory_path() / "dwarfproxy-tune" : fs::path(a.work_dir);
    source = std::make_unique<CommandMetricSource>(a.command, dir);
  } else {
    source = std::make_unique<ProxyMetricSource>(parse_clock(a.clock));
  }

  const auto observer = [&](const TuningState& st, const DecisionEntry& e) {
    if (a.quiet) return;
    out << "iter " << e.iteration << " " << e.metric << " " << e.param.to_string() << " "
        << fmt("%+.4f", e.step) << " max_dev " << fmt("%.4f", e.max_deviation_after)
        << (e.accepted ? " accepted" : " rejected") << " best " << fmt("%.4f", st.best_history.back())
        << "\n";
  };

  TuneResult result;
  try {
    result = tune(dag, target, a.config, *source, observer);
  } catch (const UntunableMetricError& e) {
    if (!a.log.empty()) {
      TuningState partial;
      partial.log = e.log();
      partial.iteration = static_cast<std::uint32_t>(e.log().size());
      std::ofstream f(a.log, std::ios::binary | std::ios::trunc);
      write_session_log(f, dag, a.config, partial);
    }
    throw;
  }
  const auto& st = result.state;
  for (const auto& w : st.warnings) err << "warning: " << w << "\n";
  if (!a.log.empty()) {
    std::ofstream f(a.log, std::ios::binary | std::ios::trunc);
    write_session_log(f, result.dag, a.config, st);
    if (!f) throw IoError("cannot write '" + a.log + "'");
  }
  if (!a.output.empty()) save_proxy_file(a.output, result.dag);

  out << (st.converged ? "converged" : "unconverged") << " after " << st.iteration
      << " iterations; max deviation " << fmt("%.4f", st.max_deviation()) << " (threshold "
      << fmt("%.4f", a.config.threshold) << ")\n";
  char buf[128];
  for (const auto& [name, d] : st.deviations) {
    std::snprintf(buf, sizeof buf, "  %-14s %.4f%s\n", name.c_str(), d,
                  d > a.config.threshold ? "  (over)" : "");
    out << buf;
  }
  if (a.output.empty()) out << "\n" << serialize(result.dag);
  return kExitOk;
}

// --- compare / report ------------------------------------------------------

struct CompareArgs {
  std::string target;
  std::string proxy;
  std::optional<double> target_time;
  std::optional<double> proxy_time;
  std::string label = "proxy";
  bool csv = false;
};

int cmd_compare(const CompareArgs& a, std::ostream& out) {
  const auto target = load_counters(a.target);
  const auto proxy = load_counters(a.proxy);
  const auto report = accuracy(target, proxy);
  const auto rows = speedup_rows(target, proxy, a.target_time, a.proxy_time, a.label);
  if (a.csv) {
    out << render_accuracy_csv(report);
    if (!rows.empty()) out << "\n" << render_speedup_csv(rows);
  } else {
    out << render_accuracy_table(report);
    if (!rows.empty()) out << "\n" << render_speedup_table(rows);
  }
  return kExitOk;
}

struct ReportArgs {
  std::string target;
  std::string proxy;
  std::string run;
  std::string session;
  std::optional<double> target_time;
  std::optional<double> proxy_time;
  std::uint64_t seed = 0;
  std::string output;
};

std::string host_name() {
  char buf[256] = {};
  if (gethostname(buf, sizeof buf - 1) != 0) return "unknown";
  return buf;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

int cmd_report(const ReportArgs& a, std::ostream& out) {
  if (a.target.empty() && a.proxy.empty() && a.run.empty() && a.session.empty()) {
    throw CliError(kExitUsage, "report needs at least one of --target, --proxy, --run, --session");
  }
  std::vector<std::pair<std::string, std::string>> artifacts;
  std::uint64_t digest = mix64(a.seed);
  const auto add = [&](const char* role, const std::string& path) {
    if (path.empty()) return std::string();
    auto text = read_text(path);
    digest = hash_bytes({reinterpret_cast<const std::uint8_t*>(text.data()), text.size()}, digest);
    artifacts.emplace_back(role, path);
    return text;
  };
  const auto target_text = add("target", a.target);
  const auto proxy_text = add("proxy", a.proxy);
  const auto run_text = add("run", a.run);
  const auto session_text = add("session", a.session);

  std::ostringstream doc;
  doc << "# dwarfproxy report\n\nhost: " << host_name() << "\ntimestamp: " << utc_timestamp()
      << "\nseed: " << a.seed << "\nconfig_digest: " << hex64(digest) << "\n\nartifacts:\n";
  for (const auto& [role, path] : artifacts) doc << "  " << role << ": " << path << "\n";

  std::optional<MetricVector> target;
  std::optional<MetricVector> proxy;
  if (!a.target.empty()) {
    target = from_file(a.target, [&] { return ingest_counters(target_text); });
    doc << "\n## target metrics (" << a.target << ")\n" << render_metric_table(*target);
  }
  if (!a.proxy.empty()) {
    proxy = from_file(a.proxy, [&] { return ingest_counters(proxy_text); });
    doc << "\n## proxy metrics (" << a.proxy << ")\n" << render_metric_table(*proxy);
  }
  if (target && proxy) {
    doc << "\n## accuracy (" << a.target << " vs " << a.proxy << ")\n"
        << render_accuracy_table(accuracy(*target, *proxy));
    const auto rows = speedup_rows(*target, *proxy, a.target_time, a.proxy_time, "proxy");
    if (!rows.empty()) doc << "\n## speedup\n" << render_speedup_table(rows);
  }
  if (!a.run.empty()) {
    std::istringstream in(run_text);
    const auto run = from_file(a.run, [&] { return read_run_result(in); });
    doc << "\n## run (" << a.run << ")\nproxy " << run.proxy << " seed=" << run.seed << "\n"
        << render_run(run);
  }
  if (!a.session.empty()) {
    const auto log = from_file(a.session, [&] { return parse_session_log(session_text); });
    std::size_t accepted = 0;
    for (const auto& d : log.decisions) accepted += d.accepted;
    doc << "\n## tuning (" << a.session << ")\nproxy " << log.proxy << "\ndecisions "
        << log.decisions.size() << " (accepted " << accepted << ")\n";
    if (log.converged) {
      doc << "status " << (*log.converged ? "converged" : "unconverged") << "\n";
    }
    if (log.max_deviation) doc << "max_deviation " << fmt("%.4f", *log.max_deviation) << "\n";
  }
  if (a.output.empty()) {
    out << doc.str();
  } else {
    write_text(a.output, doc.str());
    out << "wrote " << a.output << "\n";
  }
  return kExitOk;
}

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dwarf-based proxy benchmark generator", "dwarfproxy"};
  app.require_subcommand(1);

  DatagenArgs dg;
  auto* datagen = app.add_subcommand("datagen", "Generate a dataset and write its binary container");
  datagen->add_option("--kind", dg.kind, "text | vector | matrix | graph")->required();
  datagen->add_option("--size", dg.size, "records, values or vertices")->required();
  datagen->add_option("--seed", dg.seed, "generator seed");
  datagen->add_option("--sparsity", dg.sparsity, "fraction of zero values (vector, matrix)");
  datagen->add_option("--min", dg.lo, "smallest value");
  datagen->add_option("--max", dg.hi, "largest value");
  datagen->add_option("--dist", dg.dist, "uniform | normal");
  datagen->add_option("--dim", dg.dim, "values per row");
  datagen->add_option("--edge-factor", dg.edge_factor, "average out-degree (graph)");
  datagen->add_option("--graph", dg.graph, "power_law | uniform");
  datagen->add_option("--record-bytes", dg.record_bytes, "text record width");
  datagen->add_option("-o,--output", dg.output, "output file")->required();

  KernelArgs kr;
  auto* kernel = app.add_subcommand("kernel", "Run a single dwarf kernel");
  kernel->require_subcommand(1);
  auto* kernel_run = kernel->add_subcommand("run", "Run a kernel over a dataset file");
  kernel_run->add_option("--dwarf", kr.dwarf, "dwarf class")->required();
  kernel_run->add_option("--variant", kr.variant, "kernel variant")->required();
  kernel_run->add_option("-i,--input", kr.input, "input dataset")->required();
  kernel_run->add_option("--input-b", kr.input_b, "second operand (set, matrix)");
  kernel_run->add_option("--size", kr.size, "elements to consume (default: all)");
  kernel_run->add_option("--chunk", kr.chunk, "elements per task");
  kernel_run->add_option("--par", kr.par, "parallelism degree");
  kernel_run->add_option("--seed", kr.seed, "seed for randomized variants");
  kernel_run->add_flag("--spill", kr.spill, "spill chunk outputs to disk");
  kernel_run->add_option("--fraction", kr.options.fraction, "sampling fraction");
  kernel_run->add_option("--bins", kr.options.bins, "histogram bins");
  kernel_run->add_option("--hashes", kr.options.hashes, "minhash signature length");
  kernel_run->add_option("--key", kr.options.key, "cipher key / hash salt");
  kernel_run->add_option("--centroids", kr.options.centroids, "distance centroids");
  kernel_run->add_option("-o,--output", kr.output, "write the output dataset");

  std::string def;
  auto* proxy = app.add_subcommand("proxy", "Validate, run or print a proxy definition");
  proxy->require_subcommand(1);
  auto* proxy_validate = proxy->add_subcommand("validate", "Check a definition");
  proxy_validate->add_option("definition", def, "file or reference name")->required();
  auto* proxy_show = proxy->add_subcommand("show", "Print a definition in canonical form");
  proxy_show->add_option("definition", def, "file or reference name")->required();
  ProxyRunArgs pr;
  auto* proxy_run = proxy->add_subcommand("run", "Execute a proxy");
  proxy_run->add_option("definition", pr.def, "file or reference name")->required();
  proxy_run->add_option("--seed", pr.seed, "run seed");
  proxy_run->add_option("--budget", pr.budget, "override the total work budget");
  proxy_run->add_flag("--serial", pr.serial, "run edges one at a time");
  proxy_run->add_option("--clock", pr.clock, "runtime source for metrics")
      ->check(CLI::IsMember({"modeled", "wall"}));
  proxy_run->add_option("--result", pr.result, "write the run result");
  proxy_run->add_option("--metrics", pr.metrics, "write the metric counter file");
  proxy_run->add_flag("-q,--quiet", pr.quiet, "no summary output");

  TuneArgs tu;
  std::vector<double> steps;
  auto* tune_cmd = app.add_subcommand("tune", "Tune a proxy toward a target counter file");
  tune_cmd->add_option("definition", tu.def, "file or reference name")->required();
  tune_cmd->add_option("target", tu.target, "target counter file")->required();
  tune_cmd->add_option("--hint-size", tu.hint_size, "initial total work budget");
  tune_cmd->add_option("--hint-chunk", tu.hint_chunk, "initial chunk size of every edge");
  tune_cmd->add_option("--hint-par", tu.hint_par, "initial parallelism of every edge");
  tune_cmd->add_option("--threshold", tu.config.threshold, "largest allowed deviation");
  tune_cmd->add_option("--max-iterations", tu.config.max_iterations, "iteration cap");
  tune_cmd->add_option("--weight-band", tu.config.weight_band, "allowed weight drift");
  tune_cmd->add_option("--steps", steps, "impact-analysis perturbations")->delimiter(',');
  tune_cmd->add_option("--repetitions", tu.config.repetitions, "runs per measurement");
  tune_cmd->add_option("--seed", tu.config.seed, "measurement seed");
  tune_cmd->add_option("--reprobe-interval", tu.config.reprobe_interval, "iterations between sensitivity probes");
  tune_cmd->add_option("--max-step", tu.config.max_step, "largest relative change per move");
  tune_cmd->add_option("--clock", tu.clock, "runtime source for metrics")
      ->check(CLI::IsMember({"modeled", "wall"}));
  tune_cmd->add_option("--metric-command", tu.command,
                       "external command: <cmd> <definition> <counter-out> <seed>");
  tune_cmd->add_option("--work-dir", tu.work_dir, "scratch directory for --metric-command");
  tune_cmd->add_option("-o,--output", tu.output, "write the tuned definition");
  tune_cmd->add_option("--log", tu.log, "write the session log");
  tune_cmd->add_flag("-q,--quiet", tu.quiet, "no per-iteration output");

  CompareArgs cmp;
  auto* compare = app.add_subcommand("compare", "Accuracy and speedup of a proxy against a target");
  compare->add_option("target", cmp.target, "target counter file")->required();
  compare->add_option("proxy", cmp.proxy, "proxy counter file")->required();
  compare->add_option("--target-time", cmp.target_time, "target run time (default: its runtime metric)");
  compare->add_option("--proxy-time", cmp.proxy_time, "proxy run time (default: its runtime metric)");
  compare->add_option("--label", cmp.label, "speedup row label");
  compare->add_flag("--csv", cmp.csv, "CSV instead of aligned text");

  ReportArgs rep;
  auto* report = app.add_subcommand("report", "Assemble a report from stored artifacts");
  report->add_option("--target", rep.target, "target counter file");
  report->add_option("--proxy", rep.proxy, "proxy counter file");
  report->add_option("--run", rep.run, "run result file");
  report->add_option("--session", rep.session, "tuning session log");
  report->add_option("--target-time", rep.target_time, "target run time");
  report->add_option("--proxy-time", rep.proxy_time, "proxy run time");
  report->add_option("--seed", rep.seed, "seed recorded in the report");
  report->add_option("-o,--output", rep.output, "write the report here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (datagen->parsed()) return cmd_datagen(dg, out);
  if (kernel_run->parsed()) return cmd_kernel_run(kr, out);
  if (proxy_validate->parsed()) return cmd_proxy_validate(def, out, err);
  if (proxy_show->parsed()) {
    out << serialize(load_definition(def));
    return kExitOk;
  }
  if (proxy_run->parsed()) return cmd_proxy_run(pr, out);
  if (tune_cmd->parsed()) {
    if (!steps.empty()) tu.config.perturbation_steps = steps;
    return cmd_tune(std::move(tu), out, err);
  }
  if (compare->parsed()) return cmd_compare(cmp, out);
  if (report->parsed()) return cmd_report(rep, out);
  return kExitUsage;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  try {
    return dispatch(argc, argv, out, err);
  } catch (const CliError& e) {
    err << "error: " << e.what() << "\n";
    return e.code();
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\nRun with --help for more information.\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const LookupError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InputKindError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const RangeError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ExecutionError& e) {
    err << "error: " << e.what() << " (" << e.partial().per_edge.size()
        << " edges completed)\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace dwarfproxy::cli
