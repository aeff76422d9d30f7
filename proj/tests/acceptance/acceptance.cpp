#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstring>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "cli.hpp"
#include "dwarfproxy/autotune.hpp"
#include "dwarfproxy/datagen.hpp"
#include "dwarfproxy/kernels.hpp"
#include "dwarfproxy/metrics.hpp"
#include "dwarfproxy/proxydag.hpp"
#include "dwarfproxy/random.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

namespace dwarfproxy {
namespace {

const std::filesystem::path kFixtures = DWARFPROXY_FIXTURE_DIR;

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

KernelParams params_for(std::uint64_t n, std::uint64_t chunk, std::uint32_t par) {
  KernelParams p;
  p.input_data_size = n;
  p.chunk_size = chunk;
  p.parallelism_degree = par;
  return p;
}

const std::vector<double>& values(const KernelResult& r) { return r.output.numeric()->values; }

MetricVector one(const char* name, double v) {
  MetricVector m;
  m.set(name, v);
  return m;
}

// --- accuracy ---------------------------------------------------------------

Outcome accuracy_formula() {
  Outcome o;
  const double a = *accuracy(one("ipc", 2.0), one("ipc", 1.8)).mean;
  o.require(std::fabs(a - 0.9) <= 1e-12, "accuracy(2.0, 1.8) = " + fmt("%.17g", a));
  const double b = *accuracy(one("ipc", 1.8), one("ipc", 2.0)).mean;
  o.require(std::fabs(b - (1.0 - 0.2 / 1.8)) <= 1e-12, "accuracy(1.8, 2.0) = " + fmt("%.17g", b));

  SplitMix64 rng(2024);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    MetricVector t;
    for (const auto name : metric_names()) {
      if (name.starts_with("ratio_")) {
        t.set(name, 0.01 + 0.18 * rng.next_unit());
      } else if (is_fraction_metric(name)) {
        t.set(name, 0.01 + 0.98 * rng.next_unit());
      } else {
        t.set(name, 1e-3 + 1e9 * rng.next_unit());
      }
    }
    const auto r = accuracy(t, t);
    worst = std::max(worst, std::fabs(*r.mean - 1.0));
    for (const auto& [k, v] : r.per_metric) worst = std::max(worst, std::fabs(v - 1.0));
  }
  o.require(worst <= 1e-12, "self accuracy error " + fmt("%.3g", worst));
  if (o.ok) o.detail = "0.9, 1-0.2/1.8, self error " + fmt("%.1e", worst) + " over 100 vectors";
  return o;
}

// --- bandwidth and speedup --------------------------------------------------

Outcome bandwidth_and_speedup() {
  Outcome o;
  IoSample s;
  s.sectors_read = 600;
  s.sectors_written = 400;
  s.sector_size = 512;
  s.runtime = 10;
  const double bw = disk_bandwidth(s);
  o.require(bw == 51200.0, "disk bandwidth " + fmt("%.17g", bw));
  const double s1 = speedup(856, 1378);
  o.require(std::fabs(s1 - 1.61) <= 0.005, "speedup(856, 1378) = " + fmt("%.6g", s1));
  const double s2 = speedup(11.02, 1500);
  o.require(std::fabs(s2 - 136) <= 1, "speedup(11.02, 1500) = " + fmt("%.6g", s2));
  if (o.ok) o.detail = "51200 B/s, " + fmt("%.4f", s1) + "x, " + fmt("%.2f", s2) + "x";
  return o;
}

// --- kernel oracles ---------------------------------------------------------

void check_sort(Outcome& o) {
  const auto input = text_records(100'000, 100, 5);
  for (const auto variant : {SortVariant::Quick, SortVariant::Merge}) {
    const auto r = run_sort(input, variant, params_for(100'000, 8192, 4));
    const auto& out = *r.output.text();
    bool sorted = out.count() == 100'000;
    for (std::uint64_t i = 1; sorted && i < out.count(); ++i) {
      sorted = std::memcmp(out.record(i - 1).data(), out.record(i).data(), 100) <= 0;
    }
    std::multiset<std::string> expect;
    std::multiset<std::string> got;
    for (std::uint64_t i = 0; i < input.text()->count(); ++i) {
      const auto a = input.text()->record(i);
      expect.emplace(a.begin(), a.end());
    }
    for (std::uint64_t i = 0; i < out.count(); ++i) {
      const auto b = out.record(i);
      got.emplace(b.begin(), b.end());
    }
    o.require(sorted, "sort output not ordered");
    o.require(expect == got, "sort output is not a permutation");
  }
}

void check_transform(Outcome& o) {
  const auto x = testing::uniform_values(1024, 4);
  const auto fwd = run_transform(testing::numeric(x), TransformVariant::Fft, params_for(1024, 1024, 2));
  const auto back = run_transform(fwd.output, TransformVariant::Ifft, params_for(2048, 2048, 2));
  double err = 0.0;
  for (std::size_t i = 0; i < 1024; ++i) {
    err = std::max(err, std::fabs(values(back)[2 * i] - x[i]));
    err = std::max(err, std::fabs(values(back)[2 * i + 1]));
  }
  o.require(err < 1e-9, "ifft(fft(x)) error " + fmt("%.3g", err));

  const auto y = testing::uniform_values(64, 3);
  const auto r = run_transform(testing::numeric(y), TransformVariant::Fft, params_for(64, 64, 1));
  const auto expect = testing::direct_dft(y);
  double dft_err = 0.0;
  for (std::size_t k = 0; k < 64; ++k) {
    dft_err = std::max(dft_err, std::abs(std::complex<double>(values(r)[2 * k], values(r)[2 * k + 1]) -
                                         expect[k]));
  }
  o.require(dft_err < 1e-9, "fft vs dft error " + fmt("%.3g", dft_err));
}

void check_matrix(Outcome& o) {
  const std::uint32_t n = 32;
  const auto a = testing::uniform_values(n * n, 6);
  const auto b = testing::uniform_values(n * n, 7);
  const auto da = testing::numeric(a, n, DataKind::Matrix);
  const auto db = testing::numeric(b, n, DataKind::Matrix);
  const auto r = run_matrix(da, &db, MatrixVariant::Multiply, params_for(n * n, 128, 4));
  const auto expect = testing::triple_loop(a, b, n);
  double rel = values(r).size() == expect.size() ? 0.0 : 1.0;
  for (std::size_t i = 0; i < expect.size() && rel < 1.0; ++i) {
    rel = std::max(rel, std::fabs(values(r)[i] - expect[i]) / std::max(1.0, std::fabs(expect[i])));
  }
  o.require(rel < 1e-10, "matmul relative error " + fmt("%.3g", rel));
}

void check_set(Outcome& o) {
  const auto a = testing::integer_values(10'000, 1, 15'000);
  const auto b = testing::integer_values(10'000, 2, 15'000);
  const std::unordered_set<double> ha(a.begin(), a.end());
  const std::unordered_set<double> hb(b.begin(), b.end());
  std::set<double> uni(a.begin(), a.end());
  uni.insert(b.begin(), b.end());
  std::set<double> inter;
  std::set<double> diff;
  for (const double x : ha) (hb.count(x) ? inter : diff).insert(x);
  const auto da = testing::numeric(a);
  const auto db = testing::numeric(b);
  const auto p = params_for(20'000, 1500, 4);
  const auto as_vec = [](const std::set<double>& s) { return std::vector<double>(s.begin(), s.end()); };
  o.require(values(run_set(da, db, SetVariant::Union, p)) == as_vec(uni), "union mismatch");
  o.require(values(run_set(da, db, SetVariant::Intersection, p)) == as_vec(inter), "intersection mismatch");
  o.require(values(run_set(da, db, SetVariant::Difference, p)) == as_vec(diff), "difference mismatch");
  const auto j = values(run_set(da, db, SetVariant::Jaccard, p));
  o.require(j.size() == 1 && j[0] == static_cast<double>(inter.size()) / static_cast<double>(uni.size()),
            "jaccard mismatch");
}

void check_statistic(Outcome& o) {
  const std::uint32_t dim = 4;
  const auto v = testing::uniform_values(40'000, 12, -3.0, 7.0);
  const auto data = testing::numeric(v, dim, DataKind::Matrix);
  const auto p = params_for(v.size(), 999, 4);
  std::vector<double> sums(dim, 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) sums[i % dim] += v[i];
  const auto avg = values(run_statistic(data, StatisticVariant::Average, p));
  double err = 0.0;
  for (std::uint32_t c = 0; c < dim; ++c) {
    const double expect = sums[c] / static_cast<double>(v.size() / dim);
    err = std::max(err, std::fabs(avg[c] - expect) / std::fabs(expect));
  }
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  const auto mm = values(run_statistic(data, StatisticVariant::MinMax, p));
  err = std::max({err, std::fabs(mm[0] - *lo), std::fabs(mm[1] - *hi)});
  std::vector<double> hist(10, 0.0);
  const double width = (*hi - *lo) / 10;
  for (const double x : v) hist[static_cast<std::size_t>(std::min(9.0, std::floor((x - *lo) / width)))] += 1;
  const auto got = values(run_statistic(data, StatisticVariant::HistogramProbability, p));
  for (std::size_t b = 0; b < 10; ++b) err = std::max(err, std::fabs(got[b] - hist[b] / v.size()));
  o.require(err < 1e-12, "statistic error " + fmt("%.3g", err));
}

void check_graph(Outcome& o) {
  DataSpec spec;
  spec.kind = DataKind::Graph;
  spec.size = 1024;
  spec.edge_factor = 2;
  spec.seed = 21;
  const auto g = generate(spec);
  const testing::NaiveGraph oracle(*g.graph(), 1024);
  const auto p = params_for(1024, 100, 4);
  o.require(values(run_graph(g, GraphVariant::Bfs, p)) == oracle.bfs(), "bfs mismatch");
  o.require(values(run_graph(g, GraphVariant::ConnectedComponents, p)) == oracle.components(),
            "components mismatch");
  const auto deg = values(run_graph(g, GraphVariant::DegreeCount, p));
  bool same = deg.size() == 2048;
  for (std::uint32_t v = 0; same && v < 1024; ++v) {
    same = deg[2 * v] == oracle.out_degree[v] && deg[2 * v + 1] == oracle.in_degree[v];
  }
  o.require(same, "degree mismatch");
}

Outcome kernel_oracles() {
  Outcome o;
  check_sort(o);
  check_transform(o);
  check_matrix(o);
  check_set(o);
  check_statistic(o);
  check_graph(o);
  if (o.ok) o.detail = "sort, fft/ifft, matmul, set, statistic and graph match their oracles";
  return o;
}

// --- parallelism neutrality -------------------------------------------------

Dataset neutrality_input(Dwarf dwarf) {
  DataSpec s;
  s.seed = 77;
  switch (dwarf) {
    case Dwarf::Sort:
      return text_records(20'000, 40, 77);
    case Dwarf::Graph:
      s.kind = DataKind::Graph;
      s.size = 4096;
      return generate(s);
    case Dwarf::Matrix:
    case Dwarf::BasicStatistic:
      s.kind = DataKind::Matrix;
      s.size = 20'000;
      s.dim = 8;
      s.sparsity = 0.3;
      return generate(s);
    default:
      s.kind = DataKind::Vector;
      s.size = 20'000;
      s.value_range = {0, 2000};
      return generate(s);
  }
}

Outcome parallelism_neutrality() {
  Outcome o;
  int checked = 0;
  for (const auto dwarf : {Dwarf::Matrix, Dwarf::Sampling, Dwarf::Logic, Dwarf::Transform, Dwarf::Set,
                           Dwarf::Graph, Dwarf::Sort, Dwarf::BasicStatistic}) {
    const auto a = neutrality_input(dwarf);
    DataSpec other = a.spec;
    other.seed += 1;
    const auto b = dwarf == Dwarf::Set ? generate(other) : a;
    for (const auto variant : variants_of(dwarf)) {
      KernelInvocation inv;
      inv.dwarf = dwarf;
      inv.variant = std::string(variant);
      inv.params.input_data_size = dwarf == Dwarf::Set ? 2 * a.element_count() : a.element_count();
      inv.params.chunk_size = 1500;
      std::optional<Dataset> first;
      for (const std::uint32_t par : {1u, 2u, 8u}) {
        inv.params.parallelism_degree = par;
        const auto r = run_kernel(inv, a, dwarf == Dwarf::Set ? &b : nullptr, 5);
        if (!first) {
          first = r.output;
        } else {
          o.require(*first == r.output, std::string(to_string(dwarf)) + "/" + std::string(variant) +
                                            " differs at par " + std::to_string(par));
        }
      }
      ++checked;
    }
  }
  if (o.ok) o.detail = std::to_string(checked) + " variants identical at par 1, 2, 8";
  return o;
}

// --- terasort weights -------------------------------------------------------

Outcome terasort_weights() {
  Outcome o;
  auto dag = load_reference("terasort");
  dag.total_work_budget = 1'000'000;
  const auto run = execute(dag, 0);
  const double weights[] = {0.7, 0.1, 0.2};
  std::string got;
  o.require(run.per_edge.size() == 3, "expected 3 edges");
  for (std::size_t i = 0; i < 3 && i < run.per_edge.size(); ++i) {
    const auto w = run.per_edge[i].report.work_items;
    o.require(std::fabs(static_cast<double>(w) - weights[i] * 1e6) <= 1.0,
              "edge " + std::to_string(i) + " work " + std::to_string(w));
    got += (i ? "/" : "") + std::to_string(w);
  }
  if (o.ok) o.detail = "work_items " + got;
  return o;
}

// --- tuner ------------------------------------------------------------------

struct TunerStats {
  std::map<std::string, int> converged;
  int trials = 0;
  std::size_t iterations = 0;
  Outcome bookkeeping;
};

// Hidden parameters perturbed by up to +-30% from the tuner's starting point.
ProxyDag hidden_variant(const ProxyDag& base, SplitMix64& rng) {
  const auto u = [&] { return (rng.next_unit() * 2.0 - 1.0) * 0.3; };
  ProxyDag hidden = base;
  hidden.total_work_budget = static_cast<std::uint64_t>(std::llround(base.total_work_budget * (1 + u())));
  ParamBounds bounds;
  for (const auto& e : base.edges) bounds.initial_weights.push_back(e.invocation.params.weight);
  for (auto& e : hidden.edges) {
    auto& p = e.invocation.params;
    p.chunk_size = static_cast<std::uint64_t>(std::llround(4096 * (1 + u())));
    p.parallelism_degree = static_cast<std::uint32_t>(std::max(1L, std::lround(4 * (1 + u()))));
  }
  for (std::size_t i = 0; i < hidden.edges.size(); ++i) {
    set_weight(hidden, i, hidden.edges[i].invocation.params.weight * (1 + u()), bounds);
  }
  apply_budget(hidden);
  return hidden;
}

TunerStats run_tuner_trials(int trials) {
  TunerStats stats;
  stats.trials = trials;
  const WorkloadHints hints{50'000, 4096, 4};
  for (const auto name : reference_names()) {
    const auto base = initialize(load_reference(name), {}, hints).dag;
    std::vector<double> initial;
    for (const auto& e : base.edges) initial.push_back(e.invocation.params.weight);
    for (int t = 0; t < trials; ++t) {
      SplitMix64 rng(split_seed(1000 + static_cast<std::uint64_t>(t), std::hash<std::string_view>{}(name)));
      const auto hidden = hidden_variant(base, rng);
      ProxyMetricSource source;
      auto target = source.measure(hidden, 0);
      const auto measured = target.values();
      for (const auto& [k, v] : measured) {
        if (v == 0.0) target.erase(k);
      }
      const std::string where = std::string(name) + " trial " + std::to_string(t);
      auto& book = stats.bookkeeping;
      const auto observer = [&](const TuningState& st, const DecisionEntry&) {
        double sum = 0.0;
        for (std::size_t i = 0; i < st.dag.edges.size(); ++i) {
          const double w = st.dag.edges[i].invocation.params.weight;
          sum += w;
          book.require(std::fabs(w - initial[i]) <= 0.10 + 1e-12,
                       where + ": weight " + std::to_string(i) + " drifted to " + fmt("%.6g", w));
        }
        book.require(std::fabs(sum - 1.0) <= 1e-9, where + ": weights sum to " + fmt("%.17g", sum));
        book.require(st.log.size() == st.iteration, where + ": log length differs from iteration count");
        const auto& h = st.best_history;
        for (std::size_t i = 1; i < h.size(); ++i) {
          book.require(h[i] <= h[i - 1], where + ": best max deviation increased");
        }
      };
      const auto result = tune(base, target, TuningConfig{}, source, observer);
      stats.bookkeeping.require(result.state.log.size() == result.state.iteration,
                                where + ": final log length differs from iteration count");
      stats.iterations += result.state.iteration;
      if (result.state.converged && result.state.iteration <= 50 && result.state.max_deviation() <= 0.15) {
        ++stats.converged[std::string(name)];
      }
    }
  }
  return stats;
}

// --- sparsity ---------------------------------------------------------------

Outcome sparsity_calibration() {
  Outcome o;
  double lo = 1.0;
  double hi = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    DataSpec s;
    s.kind = DataKind::Vector;
    s.size = 1'000'000;
    s.sparsity = 0.9;
    s.seed = seed;
    const double z = zero_fraction(generate(s));
    lo = std::min(lo, z);
    hi = std::max(hi, z);
    o.require(z >= 0.89 && z <= 0.91, "seed " + std::to_string(seed) + " zero fraction " + fmt("%.6f", z));
  }
  if (o.ok) o.detail = "zero fraction in [" + fmt("%.5f", lo) + ", " + fmt("%.5f", hi) + "] over 10 seeds";
  return o;
}

// --- file formats -----------------------------------------------------------

Outcome file_formats() {
  Outcome o;
  const auto dir = testing::scratch_dir("acceptance-formats");
  for (const auto name : reference_names()) {
    const auto dag = load_reference(name);
    const auto path = dir / (std::string(name) + ".proxy");
    save_proxy_file(path, dag);
    o.require(load_proxy_file(path) == dag, std::string(name) + " proxy roundtrip differs");
  }
  const auto target = load_counter_file(kFixtures / "target.counters");
  save_counter_file(dir / "t.counters", target);
  o.require(load_counter_file(dir / "t.counters") == target, "counter roundtrip differs");

  const struct {
    const char* file;
    const char* line;
    bool counters;
  } bad[] = {
      {"bad_dwarf.proxy", "line 5:", false},        {"bad_variant.proxy", "line 4:", false},
      {"missing_weight.proxy", "line 6:", false},   {"bad_number.proxy", "line 5:", false},
      {"unknown_directive.proxy", "line 4:", false}, {"no_header.proxy", "line 1:", false},
      {"bad_source_attr.proxy", "line 2:", false},  {"unknown_metric.counters", "line 3:", true},
      {"bad_value.counters", "line 2:", true},      {"duplicate.counters", "line 4:", true},
      {"extra_field.counters", "line 1:", true},    {"out_of_range.counters", "line 2:", true},
  };
  for (const auto& c : bad) {
    const auto path = (kFixtures / c.file).string();
    const auto target_path = (kFixtures / "target.counters").string();
    std::vector<const char*> argv = {"dwarfproxy"};
    if (c.counters) {
      argv.insert(argv.end(), {"compare", target_path.c_str(), path.c_str()});
    } else {
      argv.insert(argv.end(), {"proxy", "validate", path.c_str()});
    }
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    o.require(code == cli::kExitUsage, std::string(c.file) + " exit code " + std::to_string(code));
    o.require(err.str().find(c.line) != std::string::npos,
              std::string(c.file) + " diagnostic lacks '" + c.line + "': " + err.str());
  }
  if (o.ok) o.detail = "4 proxies and 1 counter file roundtrip; 12 malformed files exit 2 with line numbers";
  return o;
}

// --- reference proxies at scale ---------------------------------------------

Outcome reference_scale(double& slowest) {
  Outcome o;
  std::string times;
  for (const auto name : reference_names()) {
    auto dag = load_reference(name);
    dag.total_work_budget = 10'000'000;
    const auto t0 = std::chrono::steady_clock::now();
    const auto run = execute(dag, 0);
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    slowest = std::max(slowest, s);
    o.require(run.per_edge.size() == dag.edges.size(), std::string(name) + " incomplete");
    o.require(s < 60.0, std::string(name) + " took " + fmt("%.1f", s) + " s");
    times += (times.empty() ? "" : ", ") + std::string(name) + " " + fmt("%.1f", s) + " s";
  }
  if (o.ok) o.detail = times;
  return o;
}

// --- driver -----------------------------------------------------------------

int failures = 0;

void report(int id, const char* name, double limit, const std::function<Outcome()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = fn();
  } catch (const std::exception& e) {
    o.ok = false;
    o.detail = std::string("exception: ") + e.what();
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (o.ok && s >= limit) {
    o.ok = false;
    o.detail = "took " + fmt("%.2f", s) + " s, limit " + fmt("%.0f", limit) + " s";
  }
  if (!o.ok) ++failures;
  std::printf("%s [%d] %s: %s (%.2f s)\n", o.ok ? "PASS" : "FAIL", id, name, o.detail.c_str(), s);
  std::fflush(stdout);
}

}  // namespace
}  // namespace dwarfproxy

int main() {
  using namespace dwarfproxy;
  report(1, "accuracy", 1.0, accuracy_formula);
  report(2, "bandwidth and speedup", 1.0, bandwidth_and_speedup);
  report(3, "kernel oracles", 30.0, kernel_oracles);
  report(4, "parallelism neutrality", 60.0, parallelism_neutrality);
  report(5, "terasort weights", 30.0, terasort_weights);

  TunerStats stats;
  report(6, "tuner self-recovery", 600.0, [&] {
    stats = run_tuner_trials(20);
    Outcome o;
    std::string counts;
    for (const auto name : reference_names()) {
      const int ok = stats.converged[std::string(name)];
      o.require(ok >= 19, std::string(name) + " converged " + std::to_string(ok) + "/20");
      counts += (counts.empty() ? "" : ", ") + std::string(name) + " " + std::to_string(ok) + "/20";
    }
    o.detail = o.ok ? counts : o.detail + " (" + counts + ")";
    return o;
  });
  report(7, "tuner bookkeeping", 600.0, [&] {
    Outcome o = stats.bookkeeping;
    if (stats.trials == 0) o.require(false, "no tuning trials ran");
    if (o.ok) o.detail = "weights, log length and best history hold over " + std::to_string(stats.iterations) +
                         " iterations";
    return o;
  });

  report(8, "sparsity calibration", 60.0, sparsity_calibration);
  report(9, "file formats", 60.0, file_formats);
  double slowest = 0.0;
  report(10, "reference proxies at scale", 60.0, [&] { return reference_scale(slowest); });
  return failures == 0 ? 0 : 1;
}
