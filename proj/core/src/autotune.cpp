#include "dwarfproxy/autotune.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <limits>
#include <sstream>

#include "dwarfproxy/parallel.hpp"
#include "text_format.hpp"

namespace dwarfproxy {

namespace {

constexpr double kMinWeight = 1e-3;
constexpr double kSensitivityFloor = 1e-9;
constexpr int kMaxHalvings = 1;
constexpr double kExploreStep = 0.1;
constexpr double kMinExploreStep = 0.01;

using detail::format_double;

double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

std::uint64_t budget_floor(const ProxyDag& dag) {
  double min_w = 1.0;
  for (const auto& e : dag.edges) min_w = std::min(min_w, e.invocation.params.weight);
  return static_cast<std::uint64_t>(std::ceil(1.0 / std::max(min_w, kMinWeight)));
}

std::vector<double> initial_weights_of(const ProxyDag& dag, const ParamBounds& bounds) {
  if (bounds.initial_weights.size() == dag.edges.size()) return bounds.initial_weights;
  std::vector<double> w;
  for (const auto& e : dag.edges) w.push_back(e.invocation.params.weight);
  return w;
}

double weight_lo(double initial, double band) { return std::max(initial - band, kMinWeight); }
double weight_hi(double initial, double band) { return std::min(initial + band, 1.0); }

std::uint64_t effective_chunk(const ProxyDag& dag, std::size_t edge) {
  return std::min(dag.edges[edge].invocation.params.chunk_size, edge_input_size(dag, edge));
}

// Moves an integer value by round(cur * step), at least one unit, within [lo, hi].
std::uint64_t step_integer(std::uint64_t cur, double step, std::uint64_t lo, std::uint64_t hi) {
  const double target = std::round(static_cast<double>(cur) * (1.0 + step));
  auto next = static_cast<std::uint64_t>(std::clamp(target, static_cast<double>(lo), static_cast<double>(hi)));
  if (next == cur && step != 0.0) {
    if (step > 0.0 && cur < hi) next = cur + 1;
    if (step < 0.0 && cur > lo) next = cur - 1;
  }
  return next;
}

double max_of(const std::map<std::string, double>& d) {
  double m = 0.0;
  for (const auto& [_, v] : d) m = std::max(m, v);
  return m;
}

double sumsq_of(const std::map<std::string, double>& d) {
  double s = 0.0;
  for (const auto& [_, v] : d) s += v * v;
  return s;
}

bool improves(const std::map<std::string, double>& next, const std::map<std::string, double>& cur) {
  const double a = max_of(next);
  const double b = max_of(cur);
  if (a < b * (1.0 - 1e-12)) return true;
  if (a > b * (1.0 + 1e-12)) return false;
  return sumsq_of(next) < sumsq_of(cur) * (1.0 - 1e-12);
}

}  // namespace

void TuningConfig::validate() const {
  if (!(threshold > 0.0 && threshold < 1.0)) throw ValidationError("threshold", "must lie in (0, 1)");
  if (max_iterations < 1) throw ValidationError("max_iterations", "must be at least 1");
  if (!(weight_band >= 0.0 && weight_band <= 1.0)) throw ValidationError("weight_band", "must lie in [0, 1]");
  if (repetitions < 1) throw ValidationError("repetitions", "must be at least 1");
  if (perturbation_steps.empty()) throw ValidationError("perturbation_steps", "must not be empty");
  for (const double s : perturbation_steps) {
    if (!(s > -1.0) || s == 0.0 || !std::isfinite(s)) {
      throw ValidationError("perturbation_steps", "steps must be finite, non-zero and > -1");
    }
  }
  if (reprobe_interval < 1) throw ValidationError("reprobe_interval", "must be at least 1");
  if (!(max_step > 0.0)) throw ValidationError("max_step", "must be positive");
}

std::string ParamId::to_string() const {
  switch (kind) {
    case ParamKind::InputDataSize: return "input_data_size";
    case ParamKind::ChunkSize: return "e" + std::to_string(edge) + ".chunk_size";
    case ParamKind::ParallelismDegree: return "e" + std::to_string(edge) + ".parallelism_degree";
    case ParamKind::Weight: return "e" + std::to_string(edge) + ".weight";
  }
  return "?";
}

ParamId ParamId::parse(std::string_view text) {
  if (text == "input_data_size") return {};
  const auto dot = text.find('.');
  if (text.size() < 2 || text[0] != 'e' || dot == std::string_view::npos) {
    throw ValidationError("param", "unknown parameter '" + std::string(text) + "'");
  }
  ParamId p;
  p.edge = detail::parse_u64(text.substr(1, dot - 1), 0, "param edge");
  const auto field = text.substr(dot + 1);
  if (field == "chunk_size") p.kind = ParamKind::ChunkSize;
  else if (field == "parallelism_degree") p.kind = ParamKind::ParallelismDegree;
  else if (field == "weight") p.kind = ParamKind::Weight;
  else throw ValidationError("param", "unknown parameter '" + std::string(text) + "'");
  return p;
}

std::vector<ParamId> tunable_parameters(const ProxyDag& dag) {
  std::vector<ParamId> out{ParamId{}};
  for (const auto kind : {ParamKind::ChunkSize, ParamKind::ParallelismDegree, ParamKind::Weight}) {
    for (std::size_t i = 0; i < dag.edges.size(); ++i) out.push_back({kind, i});
  }
  return out;
}

double parameter_value(const ProxyDag& dag, const ParamId& p) {
  if (p.kind == ParamKind::InputDataSize) return static_cast<double>(dag.total_work_budget);
  const auto& params = dag.edges.at(p.edge).invocation.params;
  switch (p.kind) {
    case ParamKind::ChunkSize: return static_cast<double>(params.chunk_size);
    case ParamKind::ParallelismDegree: return params.parallelism_degree;
    default: return params.weight;
  }
}

void set_weight(ProxyDag& dag, std::size_t edge, double weight, const ParamBounds& bounds) {
  const std::size_t n = dag.edges.size();
  const auto init = initial_weights_of(dag, bounds);
  std::vector<double> lo(n), hi(n), w(n);
  for (std::size_t j = 0; j < n; ++j) {
    lo[j] = weight_lo(init[j], bounds.weight_band);
    hi[j] = weight_hi(init[j], bounds.weight_band);
    w[j] = dag.edges[j].invocation.params.weight;
  }
  if (n == 1) {
    dag.edges[0].invocation.params.weight = 1.0;
    return;
  }
  double others_lo = 0.0;
  double others_hi = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (j == edge) continue;
    others_lo += lo[j];
    others_hi += hi[j];
  }
  const double w_lo = std::max(lo[edge], 1.0 - others_hi);
  const double w_hi = std::min(hi[edge], 1.0 - others_lo);
  w[edge] = std::clamp(weight, w_lo, std::max(w_lo, w_hi));

  // Proportional rescale of the other weights, pinning any that leave their band.
  std::vector<bool> fixed(n, false);
  fixed[edge] = true;
  for (std::size_t round = 0; round <= n; ++round) {
    double fixed_sum = 0.0;
    double free_sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) (fixed[j] ? fixed_sum : free_sum) += w[j];
    if (free_sum <= 0.0) break;
    const double scale = (1.0 - fixed_sum) / free_sum;
    bool violated = false;
    for (std::size_t j = 0; j < n; ++j) {
      if (fixed[j]) continue;
      const double v = w[j] * scale;
      if (v < lo[j]) {
        w[j] = lo[j];
        fixed[j] = violated = true;
      } else if (v > hi[j]) {
        w[j] = hi[j];
        fixed[j] = violated = true;
      }
    }
    if (!violated) {
      for (std::size_t j = 0; j < n; ++j) {
        if (!fixed[j]) w[j] *= scale;
      }
      break;
    }
  }
  // Put the rounding residual on the weights with room to absorb it.
  double residual = 1.0;
  for (const double v : w) residual -= v;
  for (std::size_t j = 0; j < n && residual != 0.0; ++j) {
    const std::size_t k = j == edge ? (edge + 1) % n : j;
    const double next = std::clamp(w[k] + residual, lo[k], hi[k]);
    residual -= next - w[k];
    w[k] = next;
  }
  for (std::size_t j = 0; j < n; ++j) dag.edges[j].invocation.params.weight = w[j];
}

bool is_pinned(const ProxyDag& dag, const ParamId& p, double sign, const ParamBounds& bounds) {
  if (sign == 0.0) return true;
  switch (p.kind) {
    case ParamKind::InputDataSize: {
      const auto v = dag.total_work_budget;
      return sign > 0 ? v >= bounds.max_budget : v <= budget_floor(dag);
    }
    case ParamKind::ChunkSize: {
      const auto v = effective_chunk(dag, p.edge);
      return sign > 0 ? v >= edge_input_size(dag, p.edge) : v <= 1;
    }
    case ParamKind::ParallelismDegree: {
      const auto v = dag.edges[p.edge].invocation.params.parallelism_degree;
      return sign > 0 ? v >= bounds.max_parallelism : v <= 1;
    }
    case ParamKind::Weight: {
      const std::size_t n = dag.edges.size();
      if (n < 2) return true;
      const auto init = initial_weights_of(dag, bounds);
      const double w = dag.edges[p.edge].invocation.params.weight;
      double others_lo = 0.0;
      double others_hi = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == p.edge) continue;
        others_lo += weight_lo(init[j], bounds.weight_band);
        others_hi += weight_hi(init[j], bounds.weight_band);
      }
      const double eps = 1e-12;
      if (sign > 0) {
        return w >= weight_hi(init[p.edge], bounds.weight_band) - eps || w >= 1.0 - others_lo - eps;
      }
      return w <= weight_lo(init[p.edge], bounds.weight_band) + eps || w <= 1.0 - others_hi + eps;
    }
  }
  return true;
}

double apply_relative_step(ProxyDag& dag, const ParamId& p, double step, const ParamBounds& bounds) {
  switch (p.kind) {
    case ParamKind::InputDataSize: {
      const auto cur = dag.total_work_budget;
      const auto next = step_integer(cur, step, budget_floor(dag), bounds.max_budget);
      dag.total_work_budget = next;
      apply_budget(dag);
      return static_cast<double>(next) / static_cast<double>(cur) - 1.0;
    }
    case ParamKind::ChunkSize: {
      const auto cur = effective_chunk(dag, p.edge);
      const auto next = step_integer(cur, step, 1, edge_input_size(dag, p.edge));
      dag.edges[p.edge].invocation.params.chunk_size = next;
      return static_cast<double>(next) / static_cast<double>(cur) - 1.0;
    }
    case ParamKind::ParallelismDegree: {
      auto& par = dag.edges[p.edge].invocation.params.parallelism_degree;
      const std::uint64_t cur = par;
      const auto next = step_integer(cur, step, 1, bounds.max_parallelism);
      par = static_cast<std::uint32_t>(next);
      return static_cast<double>(next) / static_cast<double>(cur) - 1.0;
    }
    case ParamKind::Weight: {
      const double cur = dag.edges[p.edge].invocation.params.weight;
      set_weight(dag, p.edge, cur * (1.0 + step), bounds);
      apply_budget(dag);
      const double next = dag.edges[p.edge].invocation.params.weight;
      return std::abs(next - cur) < 1e-15 ? 0.0 : next / cur - 1.0;
    }
  }
  return 0.0;
}

ProxyMetricSource::ProxyMetricSource(SoftwareClock clock, CostModel model, ExecuteOptions options)
    : clock_(clock), model_(model), options_(std::move(options)) {
  if (!options_.cache) options_.cache = &cache_;
}

MetricVector ProxyMetricSource::measure(const ProxyDag& dag, std::uint64_t seed) {
  const bool memoize = deterministic();
  std::string key;
  if (memoize) {
    key = serialize(dag) + "#" + std::to_string(seed);
    if (const auto it = memo_.find(key); it != memo_.end()) return it->second;
  }
  ++executions_;
  const auto run = execute(dag, seed, options_);
  auto metrics = software_metrics(run, clock_, model_);
  if (memoize) memo_.emplace(std::move(key), metrics);
  return metrics;
}

CommandMetricSource::CommandMetricSource(std::string command, std::filesystem::path work_dir)
    : command_(std::move(command)), work_dir_(std::move(work_dir)) {}

MetricVector CommandMetricSource::measure(const ProxyDag& dag, std::uint64_t seed) {
  std::filesystem::create_directories(work_dir_);
  const auto n = std::to_string(++calls_);
  const auto def = work_dir_ / ("candidate-" + n + ".proxy");
  const auto counters = work_dir_ / ("candidate-" + n + ".counters");
  save_proxy_file(def, dag);
  const std::string cmd = command_ + " '" + def.string() + "' '" + counters.string() + "' " +
                          std::to_string(seed);
  const int status = std::system(cmd.c_str());
  if (status != 0) {
    throw Error("metric command '" + command_ + "' failed with status " + std::to_string(status));
  }
  return load_counter_file(counters);
}

MetricVector measure_median(MetricSource& source, const ProxyDag& dag, std::uint64_t seed,
                            std::uint32_t repetitions) {
  const std::uint32_t reps = source.deterministic() ? 1 : std::max<std::uint32_t>(1, repetitions);
  std::vector<MetricVector> runs;
  for (std::uint32_t r = 0; r < reps; ++r) runs.push_back(source.measure(dag, seed));
  if (reps == 1) return runs.front();
  MetricVector out;
  for (const auto& [name, _] : runs.front().values()) {
    std::vector<double> v;
    for (const auto& run : runs) {
      if (const auto x = run.get(name)) v.push_back(*x);
    }
    if (v.size() != runs.size()) continue;
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    out.set(name, v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]));
  }
  return out;
}

double SensitivityMatrix::at(std::size_t p, std::string_view metric) const {
  for (std::size_t m = 0; m < metrics.size(); ++m) {
    if (metrics[m] == metric) return s.at(p).at(m);
  }
  return 0.0;
}

double TuningState::max_deviation() const { return max_of(deviations); }

UntunableMetricError::UntunableMetricError(std::string metric, std::vector<DecisionEntry> log)
    : Error("untunable metric '" + metric + "': every parameter sensitivity is below 1e-9"),
      metric_(std::move(metric)),
      log_(std::move(log)) {}

TuningState initialize(const ProxyDag& dag, const MetricVector& target, const WorkloadHints& hints) {
  (void)target;
  TuningState st;
  st.dag = dag;
  std::uint64_t budget = kDefaultHintBudget;
  if (hints.data_size && *hints.data_size > 0) {
    budget = *hints.data_size;
  } else {
    st.warnings.push_back("no data size hint; using budget " + std::to_string(kDefaultHintBudget));
  }
  std::uint64_t chunk = kDefaultHintChunk;
  if (hints.chunk_size && *hints.chunk_size > 0) {
    chunk = *hints.chunk_size;
  } else {
    st.warnings.push_back("no chunk size hint; using " + std::to_string(kDefaultHintChunk));
  }
  std::uint32_t par = host_parallelism();
  if (hints.parallelism && *hints.parallelism > 0) {
    par = *hints.parallelism;
  } else {
    st.warnings.push_back("no parallelism hint; using host cores (" + std::to_string(par) + ")");
  }
  st.dag.total_work_budget = budget;
  for (auto& e : st.dag.edges) {
    e.invocation.params.chunk_size = chunk;
    e.invocation.params.parallelism_degree = par;
    st.initial_weights.push_back(e.invocation.params.weight);
  }
  apply_budget(st.dag);
  return st;
}

std::map<std::string, double> deviations(const MetricVector& target, const MetricVector& proxy) {
  std::map<std::string, double> out;
  for (const auto& [name, t] : target.values()) {
    if (const auto p = proxy.get(name)) out[name] = relative_deviation(name, t, *p);
  }
  return out;
}

SensitivityMatrix impact_analysis(const ProxyDag& dag, MetricSource& source,
                                  const TuningConfig& config, const ParamBounds& bounds) {
  SensitivityMatrix sm;
  sm.params = tunable_parameters(dag);
  const auto base = measure_median(source, dag, config.seed, config.repetitions);
  for (const auto& [name, _] : base.values()) sm.metrics.push_back(name);
  sm.s.assign(sm.params.size(), std::vector<double>(sm.metrics.size(), 0.0));
  for (std::size_t p = 0; p < sm.params.size(); ++p) {
    std::vector<double> sum(sm.metrics.size(), 0.0);
    std::size_t used = 0;
    for (const double step : config.perturbation_steps) {
      ProxyDag probe = dag;
      double realized = 0.0;
      try {
        realized = apply_relative_step(probe, sm.params[p], step, bounds);
      } catch (const Error& e) {
        throw Error("impact analysis of " + sm.params[p].to_string() + " failed: " + e.what());
      }
      if (realized == 0.0) continue;
      MetricVector m;
      try {
        m = measure_median(source, probe, config.seed, config.repetitions);
      } catch (const Error& e) {
        throw Error("impact analysis of " + sm.params[p].to_string() + " failed: " + e.what());
      }
      for (std::size_t k = 0; k < sm.metrics.size(); ++k) {
        const double b = *base.get(sm.metrics[k]);
        const auto v = m.get(sm.metrics[k]);
        if (b == 0.0 || !v) continue;
        sum[k] += ((*v - b) / std::abs(b)) / realized;
      }
      ++used;
    }
    if (used == 0) continue;
    for (std::size_t k = 0; k < sm.metrics.size(); ++k) {
      sm.s[p][k] = sum[k] / static_cast<double>(used);
    }
  }
  return sm;
}

std::optional<Adjustment> choose_adjustment(const TuningState& state, const MetricVector& target,
                                            const SensitivityMatrix& sens,
                                            const TuningConfig& config, const ParamBounds& bounds) {
  std::vector<std::pair<std::string, double>> worst;
  for (const auto& [name, d] : state.deviations) {
    if (d > config.threshold) worst.emplace_back(name, d);
  }
  std::stable_sort(worst.begin(), worst.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  for (std::size_t rank = 0; rank < worst.size(); ++rank) {
    const auto& [metric, dev] = worst[rank];
    const double sign_dev = sign_of(*state.latest.get(metric) - *target.get(metric));
    bool any_sensitive = false;
    std::optional<Adjustment> best;
    double best_abs = 0.0;
    for (std::size_t p = 0; p < sens.params.size(); ++p) {
      const double s = sens.at(p, metric);
      if (std::abs(s) < kSensitivityFloor) continue;
      any_sensitive = true;
      const double step = std::clamp(-sign_dev * dev / s, -config.max_step, config.max_step);
      const auto& id = sens.params[p];
      if (state.tabu.count(id) || is_pinned(state.dag, id, sign_of(step), bounds)) continue;
      if (!best || std::abs(s) > best_abs) {
        best = Adjustment{metric, id, step};
        best_abs = std::abs(s);
      }
    }
    if (!any_sensitive && rank == 0) throw UntunableMetricError(metric, state.log);
    if (best) return best;
  }
  return std::nullopt;
}

TuneResult tune(const ProxyDag& dag, const MetricVector& target, const TuningConfig& config,
                MetricSource& source, const TuneObserver& observer) {
  config.validate();
  TuningState st;
  st.dag = dag;
  apply_budget(st.dag);
  for (const auto& e : dag.edges) st.initial_weights.push_back(e.invocation.params.weight);
  ParamBounds bounds;
  bounds.initial_weights = st.initial_weights;
  bounds.weight_band = config.weight_band;

  st.latest = measure_median(source, st.dag, config.seed, config.repetitions);
  st.deviations = deviations(target, st.latest);
  if (st.deviations.empty()) {
    throw ValidationError("target", "no target metric is measured by the metric source");
  }
  for (const auto& [name, _] : target.values()) {
    if (!st.latest.has(name)) st.warnings.push_back("target metric '" + name + "' is not measured");
  }
  st.best_history.push_back(st.max_deviation());
  if (st.max_deviation() <= config.threshold) {
    st.converged = true;
    return {st.dag, st};
  }

  auto sens = impact_analysis(st.dag, source, config, bounds);
  TuningState best = st;
  std::uint32_t since_probe = 0;
  bool moved_since_probe = false;
  std::map<ParamId, int> halvings;
  std::optional<Adjustment> retry;
  // Value of the last rejected move; a halved retry landing on it is skipped.
  double rejected_value = std::numeric_limits<double>::quiet_NaN();
  // Coordinate moves tried when every sensitivity-guided candidate is exhausted.
  std::deque<Adjustment> explore;
  double explore_step = kExploreStep;

  const auto reprobe = [&] {
    sens = impact_analysis(st.dag, source, config, bounds);
    since_probe = 0;
    moved_since_probe = false;
    st.tabu.clear();
    halvings.clear();
    retry.reset();
  };
  const auto worst_metric = [&] {
    return std::max_element(st.deviations.begin(), st.deviations.end(),
                            [](const auto& a, const auto& b) { return a.second < b.second; })
        ->first;
  };

  while (st.iteration < config.max_iterations) {
    if (since_probe >= config.reprobe_interval && moved_since_probe) reprobe();
    std::optional<Adjustment> adj;
    bool exploring = false;
    if (retry) {
      adj = retry;
      retry.reset();
    } else if (explore.empty()) {
      try {
        adj = choose_adjustment(st, target, sens, config, bounds);
      } catch (const UntunableMetricError&) {
        if (!moved_since_probe) throw;
        reprobe();
        continue;
      }
    }
    if (!adj) {
      if (moved_since_probe) {
        reprobe();
        continue;
      }
      if (explore.empty()) {
        if (explore_step < kMinExploreStep) break;
        for (const auto& p : tunable_parameters(st.dag)) {
          for (const double sign : {1.0, -1.0}) {
            if (!is_pinned(st.dag, p, sign, bounds)) {
              explore.push_back({worst_metric(), p, sign * explore_step});
            }
          }
        }
        explore_step /= 2.0;
        if (explore.empty()) break;
      }
      adj = explore.front();
      explore.pop_front();
      exploring = true;
    }

    ProxyDag candidate = st.dag;
    const double realized = apply_relative_step(candidate, adj->param, adj->step, bounds);
    const double value_after = parameter_value(candidate, adj->param);
    if (realized == 0.0 || rejected_value == value_after) {
      rejected_value = std::numeric_limits<double>::quiet_NaN();
      halvings.erase(adj->param);
      if (!exploring) st.tabu.insert(adj->param);
      continue;
    }
    rejected_value = std::numeric_limits<double>::quiet_NaN();

    ++st.iteration;
    ++since_probe;
    DecisionEntry entry;
    entry.iteration = st.iteration;
    entry.metric = adj->metric;
    entry.param = adj->param;
    entry.step = realized;
    entry.value_before = parameter_value(st.dag, adj->param);
    entry.value_after = value_after;
    entry.deviation_before = st.deviations.at(adj->metric);

    const auto metrics = measure_median(source, candidate, config.seed, config.repetitions);
    const auto devs = deviations(target, metrics);
    entry.deviation_after = devs.count(adj->metric) ? devs.at(adj->metric) : entry.deviation_before;
    entry.max_deviation_after = max_of(devs);
    if (devs.size() == st.deviations.size() && improves(devs, st.deviations)) {
      entry.accepted = true;
      st.dag = std::move(candidate);
      st.latest = metrics;
      st.deviations = devs;
      st.tabu.clear();
      halvings.clear();
      explore.clear();
      explore_step = kExploreStep;
      moved_since_probe = true;
    } else if (!exploring && halvings[adj->param] < kMaxHalvings) {
      ++halvings[adj->param];
      retry = Adjustment{adj->metric, adj->param, adj->step / 2.0};
      rejected_value = value_after;
    } else if (!exploring) {
      halvings.erase(adj->param);
      st.tabu.insert(adj->param);
    }
    if (entry.accepted && improves(st.deviations, best.deviations)) best = st;
    st.log.push_back(entry);
    st.best_history.push_back(best.max_deviation());
    if (observer) observer(st, entry);
    if (st.max_deviation() <= config.threshold) {
      st.converged = true;
      break;
    }
  }
  if (!st.converged) {
    st.dag = best.dag;
    st.latest = best.latest;
    st.deviations = best.deviations;
  }
  return {st.dag, st};
}

std::string session_header(const ProxyDag& dag, const TuningConfig& c) {
  std::string steps;
  for (std::size_t i = 0; i < c.perturbation_steps.size(); ++i) {
    steps += (i ? "," : "") + format_double(c.perturbation_steps[i]);
  }
  return "session proxy=" + dag.name + " threshold=" + format_double(c.threshold) +
         " max_iterations=" + std::to_string(c.max_iterations) +
         " weight_band=" + format_double(c.weight_band) + " steps=" + steps +
         " repetitions=" + std::to_string(c.repetitions) + " seed=" + std::to_string(c.seed) +
         " reprobe_interval=" + std::to_string(c.reprobe_interval) +
         " max_step=" + format_double(c.max_step) + "\n";
}

std::string format_decision(const DecisionEntry& e) {
  return "decision iteration=" + std::to_string(e.iteration) + " metric=" + e.metric +
         " param=" + e.param.to_string() + " step=" + format_double(e.step) +
         " before=" + format_double(e.value_before) + " after=" + format_double(e.value_after) +
         " deviation_before=" + format_double(e.deviation_before) +
         " deviation_after=" + format_double(e.deviation_after) +
         " max_deviation=" + format_double(e.max_deviation_after) +
         " accepted=" + (e.accepted ? "1" : "0") + "\n";
}

std::string session_footer(const TuningState& st) {
  return "result converged=" + std::string(st.converged ? "1" : "0") +
         " iterations=" + std::to_string(st.iteration) +
         " max_deviation=" + format_double(st.max_deviation()) + "\n";
}

void write_session_log(std::ostream& out, const ProxyDag& dag, const TuningConfig& config,
                       const TuningState& state) {
  out << session_header(dag, config);
  for (const auto& e : state.log) out << format_decision(e);
  out << session_footer(state);
}

SessionLog parse_session_log(std::string_view document) {
  SessionLog log;
  detail::for_each_line(document, [&](std::size_t line, std::string_view text) {
    const auto tok = detail::tokenize(text);
    if (tok.empty()) return;
    std::map<std::string, std::string_view> kv;
    for (std::size_t i = 1; i < tok.size(); ++i) {
      const auto [k, v] = detail::split_key_value(tok[i]);
      if (k.empty()) throw ParseError(line, "expected key=value, got '" + std::string(tok[i]) + "'");
      if (!kv.emplace(std::string(k), v).second) {
        throw ParseError(line, "key '" + std::string(k) + "' given twice");
      }
    }
    const auto need = [&](const char* key) {
      const auto it = kv.find(key);
      if (it == kv.end()) throw ParseError(line, std::string("missing ") + key + "=");
      return it->second;
    };
    if (tok[0] == "session") {
      log.proxy = std::string(need("proxy"));
      for (const auto& [k, v] : kv) {
        if (k != "proxy") log.config[k] = std::string(v);
      }
    } else if (tok[0] == "decision") {
      DecisionEntry e;
      e.iteration = static_cast<std::uint32_t>(detail::parse_u64(need("iteration"), line, "iteration"));
      e.metric = std::string(need("metric"));
      try {
        e.param = ParamId::parse(need("param"));
      } catch (const ValidationError& ex) {
        throw ParseError(line, ex.what());
      }
      e.step = detail::parse_double(need("step"), line, "step");
      e.value_before = detail::parse_double(need("before"), line, "before");
      e.value_after = detail::parse_double(need("after"), line, "after");
      e.deviation_before = detail::parse_double(need("deviation_before"), line, "deviation_before");
      e.deviation_after = detail::parse_double(need("deviation_after"), line, "deviation_after");
      e.max_deviation_after = detail::parse_double(need("max_deviation"), line, "max_deviation");
      const auto acc = need("accepted");
      if (acc != "0" && acc != "1") throw ParseError(line, "accepted must be 0 or 1");
      e.accepted = acc == "1";
      log.decisions.push_back(std::move(e));
    } else if (tok[0] == "result") {
      const auto conv = need("converged");
      if (conv != "0" && conv != "1") throw ParseError(line, "converged must be 0 or 1");
      log.converged = conv == "1";
      log.iterations = static_cast<std::uint32_t>(detail::parse_u64(need("iterations"), line, "iterations"));
      log.max_deviation = detail::parse_double(need("max_deviation"), line, "max_deviation");
    } else {
      throw ParseError(line, "unknown record '" + std::string(tok[0]) + "'");
    }
  });
  return log;
}

}  // namespace dwarfproxy
