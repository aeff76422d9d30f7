#pragma once

#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "dwarfproxy/metrics.hpp"
#include "dwarfproxy/proxydag.hpp"

namespace dwarfproxy {

struct TuningConfig {
  // Maximum relative deviation allowed per metric.
  double threshold = 0.15;
  std::uint32_t max_iterations = 50;
  // Allowed absolute drift of each weight from its initial value.
  double weight_band = 0.10;
  // Relative perturbations applied to each parameter during impact analysis.
  std::vector<double> perturbation_steps = {-0.25, 0.25};
  // Runs per measurement; the per-metric median is used.
  std::uint32_t repetitions = 3;
  std::uint64_t seed = 0;
  // Sensitivities are re-estimated after this many adjustment iterations.
  std::uint32_t reprobe_interval = 10;
  // Largest relative change applied in one adjustment.
  double max_step = 0.5;

  void validate() const;
};

enum class ParamKind : std::uint8_t { InputDataSize, ChunkSize, ParallelismDegree, Weight };

// One tunable parameter instance. input_data_size is global: edges draw
// round(weight * budget) elements, so it acts through the DAG budget.
struct ParamId {
  ParamKind kind = ParamKind::InputDataSize;
  std::size_t edge = 0;  // unused for InputDataSize

  std::string to_string() const;
  static ParamId parse(std::string_view text);
  auto operator<=>(const ParamId&) const = default;
};

// Every parameter instance of the DAG in tie-break order: input_data_size,
// then chunk sizes, parallelism degrees and weights in edge order.
std::vector<ParamId> tunable_parameters(const ProxyDag& dag);

double parameter_value(const ProxyDag& dag, const ParamId& p);

// Bounds that keep a DAG executable and weights inside their band.
struct ParamBounds {
  std::vector<double> initial_weights;
  double weight_band = 0.10;
  std::uint64_t max_budget = 1'000'000'000;
  std::uint32_t max_parallelism = 256;
};

// Applies a relative change to p (integers move by at least one unit, values
// clamp to bounds; weights renormalize their siblings inside the band).
// Returns the realized relative change, 0 when p could not move.
double apply_relative_step(ProxyDag& dag, const ParamId& p, double step, const ParamBounds& bounds);

// Whether p is at the bound it would cross when moved in direction `sign`.
bool is_pinned(const ProxyDag& dag, const ParamId& p, double sign, const ParamBounds& bounds);

// Sets weight[index] and rescales the others so all stay within
// [initial - band, initial + band] and sum to 1.
void set_weight(ProxyDag& dag, std::size_t edge, double weight, const ParamBounds& bounds);

// Produces a MetricVector for a DAG.
class MetricSource {
 public:
  virtual ~MetricSource() = default;
  virtual MetricVector measure(const ProxyDag& dag, std::uint64_t seed) = 0;
  // Deterministic sources are measured once per probe.
  virtual bool deterministic() const { return false; }
};

// Executes the DAG and derives software metrics.
class ProxyMetricSource : public MetricSource {
 public:
  explicit ProxyMetricSource(SoftwareClock clock = SoftwareClock::Modeled, CostModel model = {},
                             ExecuteOptions options = {});
  MetricVector measure(const ProxyDag& dag, std::uint64_t seed) override;
  bool deterministic() const override { return clock_ == SoftwareClock::Modeled; }
  std::size_t executions() const noexcept { return executions_; }

 private:
  SoftwareClock clock_;
  CostModel model_;
  ExecuteOptions options_;
  DatasetCache cache_;
  std::map<std::string, MetricVector> memo_;
  std::size_t executions_ = 0;
};

// Runs `<command> <definition file> <counter file> <seed>` and ingests the
// counter file the command writes.
class CommandMetricSource : public MetricSource {
 public:
  CommandMetricSource(std::string command, std::filesystem::path work_dir);
  MetricVector measure(const ProxyDag& dag, std::uint64_t seed) override;

 private:
  std::string command_;
  std::filesystem::path work_dir_;
  std::size_t calls_ = 0;
};

// Median over `repetitions` measurements (one for deterministic sources).
MetricVector measure_median(MetricSource& source, const ProxyDag& dag, std::uint64_t seed,
                            std::uint32_t repetitions);

struct SensitivityMatrix {
  std::vector<ParamId> params;
  std::vector<std::string> metrics;
  // s[p][m]: relative change of metric m per unit relative change of p.
  std::vector<std::vector<double>> s;

  double at(std::size_t p, std::string_view metric) const;
};

struct DecisionEntry {
  std::uint32_t iteration = 0;
  std::string metric;
  ParamId param;
  double step = 0.0;  // realized relative change
  double value_before = 0.0;
  double value_after = 0.0;
  double deviation_before = 0.0;  // of `metric`
  double deviation_after = 0.0;
  double max_deviation_after = 0.0;
  bool accepted = false;
};

struct TuningState {
  std::uint32_t iteration = 0;
  ProxyDag dag;
  MetricVector latest;
  // |proxy - target| / |target| per measured target metric.
  std::map<std::string, double> deviations;
  std::vector<DecisionEntry> log;
  std::vector<double> initial_weights;
  // Best max deviation after initialization and after each iteration.
  std::vector<double> best_history;
  bool converged = false;
  std::vector<std::string> warnings;
  // Parameters excluded for the current worst metric after failed moves.
  std::set<ParamId> tabu;

  double max_deviation() const;
};

struct WorkloadHints {
  std::optional<std::uint64_t> data_size;
  std::optional<std::uint64_t> chunk_size;
  std::optional<std::uint32_t> parallelism;
};

inline constexpr std::uint64_t kDefaultHintBudget = 1'000'000;
inline constexpr std::uint64_t kDefaultHintChunk = 1u << 14;

// Sets the budget, every edge's chunk size and parallelism degree from the
// hints (missing hints fall back to defaults and record a warning). Weights
// are kept. Metrics are not measured here.
TuningState initialize(const ProxyDag& dag, const MetricVector& target, const WorkloadHints& hints);

// Deviations of every target metric the proxy vector measures. Target
// metrics the proxy lacks are skipped.
std::map<std::string, double> deviations(const MetricVector& target, const MetricVector& proxy);

SensitivityMatrix impact_analysis(const ProxyDag& dag, MetricSource& source,
                                  const TuningConfig& config, const ParamBounds& bounds);

struct Adjustment {
  std::string metric;
  ParamId param;
  double step = 0.0;  // signed relative change
};

// Every sensitivity of the worst metric is below 1e-9.
class UntunableMetricError : public Error {
 public:
  UntunableMetricError(std::string metric, std::vector<DecisionEntry> log);
  const std::string& metric() const noexcept { return metric_; }
  const std::vector<DecisionEntry>& log() const noexcept { return log_; }

 private:
  std::string metric_;
  std::vector<DecisionEntry> log_;
};

// Picks the worst-deviating metric and the unpinned, non-tabu parameter with
// the largest |sensitivity| for it, stepping by -sign * deviation / s,
// clamped to +-config.max_step. Returns nothing when every candidate is
// pinned or tabu.
std::optional<Adjustment> choose_adjustment(const TuningState& state, const MetricVector& target,
                                            const SensitivityMatrix& sensitivities,
                                            const TuningConfig& config, const ParamBounds& bounds);

struct TuneResult {
  ProxyDag dag;  // best parameters found
  TuningState state;
};

using TuneObserver = std::function<void(const TuningState&, const DecisionEntry&)>;

// Adjust / measure / feed back until every deviation is within the threshold
// or max_iterations is reached. A move is kept only when it lowers the largest
// deviation (ties: the sum of squared deviations). A rejected move is retried
// once at half the step, then its parameter is tabu until the next accepted
// move. When every guided candidate is exhausted, +-10% coordinate moves are
// tried, halving down to 1%. An unconverged result carries the best state.
TuneResult tune(const ProxyDag& dag, const MetricVector& target, const TuningConfig& config,
                MetricSource& source, const TuneObserver& observer = {});

// Session log: `session`, `decision` and `result` lines of key=value pairs.
std::string session_header(const ProxyDag& dag, const TuningConfig& config);
std::string format_decision(const DecisionEntry& entry);
std::string session_footer(const TuningState& state);
void write_session_log(std::ostream& out, const ProxyDag& dag, const TuningConfig& config,
                       const TuningState& state);

struct SessionLog {
  std::string proxy;
  std::map<std::string, std::string> config;
  std::vector<DecisionEntry> decisions;
  std::optional<bool> converged;
  std::optional<std::uint32_t> iterations;
  std::optional<double> max_deviation;
};
SessionLog parse_session_log(std::string_view document);

}  // namespace dwarfproxy
