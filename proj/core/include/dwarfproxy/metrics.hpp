#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dwarfproxy/proxydag.hpp"

namespace dwarfproxy {

// The fixed metric namespace, in canonical order. soft_mips is the software
// operation-rate analogue of mips and is never compared against hardware mips.
std::span<const std::string_view> metric_names() noexcept;
bool is_metric_name(std::string_view name) noexcept;

// Metrics whose admissible range is [0, 1].
bool is_fraction_metric(std::string_view name) noexcept;

// The five instruction-mix ratios.
std::span<const std::string_view> mix_metric_names() noexcept;

// Named measurements; every entry is optional.
class MetricVector {
 public:
  // Throws LookupError for unknown names and RangeError for inadmissible values.
  void set(std::string_view name, double value);
  std::optional<double> get(std::string_view name) const;
  bool has(std::string_view name) const { return values_.count(std::string(name)) > 0; }
  void erase(std::string_view name) { values_.erase(std::string(name)); }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }
  const std::map<std::string, double>& values() const noexcept { return values_; }

  // Cross-metric invariant: present mix ratios sum to at most 1 + 1e-6.
  void validate() const;

  bool operator==(const MetricVector&) const = default;

 private:
  std::map<std::string, double> values_;
};

struct AccuracyReport {
  // 1 - |(proxy - target) / target| per shared metric; unclamped.
  std::map<std::string, double> per_metric;
  // Mean over shared metrics; empty when nothing is shared.
  std::optional<double> mean;
  // Metrics present in exactly one of the two vectors.
  std::vector<std::string> absent;

  bool has_negative() const;
};

// Throws DivisionHazardError when a shared metric has a zero target.
AccuracyReport accuracy(const MetricVector& target, const MetricVector& proxy);

// |proxy - target| / |target| for one value. Throws DivisionHazardError.
double relative_deviation(std::string_view metric, double target, double proxy);

struct IoSample {
  double sectors_read = 0;
  double sectors_written = 0;
  double sector_size = 512;
  double runtime = 1;
};

// (sectors_read + sectors_written) * sector_size / runtime, bytes per second.
double disk_bandwidth(const IoSample& sample);

// Byte counts rounded up to whole sectors.
IoSample io_sample_from_bytes(std::uint64_t bytes_read, std::uint64_t bytes_written,
                              double runtime, double sector_size = 512);

// time_b / time_a, e.g. speedup(x86_time, arm_time).
double speedup(double time_a, double time_b);

// Counter file: `name value` lines, `#` comments.
MetricVector ingest_counters(std::string_view document);
std::string emit_counters(const MetricVector& metrics);
MetricVector load_counter_file(const std::filesystem::path& path);
void save_counter_file(const std::filesystem::path& path, const MetricVector& metrics);

// Abstract execution-time model used by the modeled clock. Per edge:
//   eff  = min(parallelism, chunks)
//   time = ops / (op_rate * eff) + chunks * chunk_overhead / eff
//        + parallelism * spawn_cost + (bytes_read + bytes_written) / disk_rate
// and the proxy runtime is the sum over edges.
struct CostModel {
  double op_rate = 1e9;
  double chunk_overhead = 2e-5;
  double spawn_cost = 5e-5;
  double disk_rate = 5e8;
};

enum class SoftwareClock : std::uint8_t { Wall, Modeled };

double modeled_edge_time(const EdgeRun& edge, const CostModel& model = {});
double modeled_runtime(const RunResult& run, const CostModel& model = {});

// runtime, disk_io_bw, soft_mips and instruction-mix ratios from a run's
// soft counters and byte tallies. Hardware-only metrics stay absent.
MetricVector software_metrics(const RunResult& run, SoftwareClock clock = SoftwareClock::Wall,
                              const CostModel& model = {});

// disk_io_bw from the process-level I/O counters instead of kernel tallies.
std::optional<double> process_disk_bandwidth(const RunResult& run);

// Aligned text and CSV renderings.
std::string render_accuracy_table(const AccuracyReport& report);
std::string render_accuracy_csv(const AccuracyReport& report);
std::string render_metric_table(const MetricVector& metrics);

struct SpeedupRow {
  std::string label;
  double time_a = 0;
  double time_b = 0;
};
// Rows formatted as "<label>  <time_b>/<time_a>  <speedup>x" with one decimal.
std::string render_speedup_table(std::span<const SpeedupRow> rows);
std::string render_speedup_csv(std::span<const SpeedupRow> rows);

}  // namespace dwarfproxy
