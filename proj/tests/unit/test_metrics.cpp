#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "dwarfproxy/error.hpp"
#include "dwarfproxy/metrics.hpp"
#include "dwarfproxy/random.hpp"
#include "test_support.hpp"

namespace dwarfproxy {
namespace {

const std::filesystem::path kFixtures = DWARFPROXY_FIXTURE_DIR;

MetricVector vec(std::initializer_list<std::pair<const char*, double>> entries) {
  MetricVector v;
  for (const auto& [k, x] : entries) v.set(k, x);
  return v;
}

// Second implementation: mean of 1 - |p - t| / |t| over shared keys.
double oracle_mean(const std::map<std::string, double>& t, const std::map<std::string, double>& p) {
  double sum = 0.0;
  int n = 0;
  for (const auto& [k, tv] : t) {
    const auto it = p.find(k);
    if (it == p.end()) continue;
    sum += 1.0 - std::fabs(it->second - tv) / std::fabs(tv);
    ++n;
  }
  return sum / n;
}

TEST(Metrics, AccuracyWorkedValues) {
  const auto r = accuracy(vec({{"ipc", 2.0}}), vec({{"ipc", 1.8}}));
  EXPECT_NEAR(r.per_metric.at("ipc"), 0.9, 1e-12);
  EXPECT_NEAR(*r.mean, 0.9, 1e-12);

  const auto r2 = accuracy(vec({{"ipc", 1.8}}), vec({{"ipc", 2.0}}));
  EXPECT_NEAR(r2.per_metric.at("ipc"), 1.0 - 0.2 / 1.8, 1e-12);
}

TEST(Metrics, SelfAccuracyIsOne) {
  SplitMix64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    MetricVector v;
    for (const auto name : metric_names()) {
      if (is_fraction_metric(name)) {
        if (name.starts_with("ratio_")) continue;
        v.set(name, 0.01 + 0.98 * rng.next_unit());
      } else {
        v.set(name, 1e-3 + 1e6 * rng.next_unit());
      }
    }
    const auto r = accuracy(v, v);
    ASSERT_TRUE(r.mean.has_value());
    EXPECT_LE(std::fabs(*r.mean - 1.0), 1e-12);
    for (const auto& [k, a] : r.per_metric) EXPECT_LE(std::fabs(a - 1.0), 1e-12) << k;
  }
}

TEST(Metrics, AccuracyMatchesIndependentOracle) {
  SplitMix64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    MetricVector t, p;
    for (const auto name : {"ipc", "mips", "runtime", "disk_io_bw", "l2_hit"}) {
      const bool frac = is_fraction_metric(name);
      t.set(name, frac ? 0.1 + 0.8 * rng.next_unit() : 0.5 + 100 * rng.next_unit());
      p.set(name, frac ? rng.next_unit() : 300 * rng.next_unit());
    }
    const auto r = accuracy(t, p);
    EXPECT_NEAR(*r.mean, oracle_mean(t.values(), p.values()), 1e-12);
  }
}

TEST(Metrics, AccuracyIsUnclampedAndFlagsNegatives) {
  const auto r = accuracy(vec({{"mips", 100}}), vec({{"mips", 350}}));
  EXPECT_NEAR(r.per_metric.at("mips"), -1.5, 1e-12);
  EXPECT_TRUE(r.has_negative());
  EXPECT_NE(render_accuracy_table(r).find("negative"), std::string::npos);
}

TEST(Metrics, AbsentMetricsAreListedNotScored) {
  const auto r = accuracy(vec({{"ipc", 1}, {"mips", 10}}), vec({{"ipc", 1}, {"runtime", 2}}));
  EXPECT_EQ(r.per_metric.size(), 1u);
  EXPECT_EQ(r.absent, (std::vector<std::string>{"mips", "runtime"}));

  const auto none = accuracy(vec({{"ipc", 1}}), vec({{"mips", 1}}));
  EXPECT_FALSE(none.mean.has_value());
  EXPECT_NE(render_accuracy_table(none).find("no shared metrics"), std::string::npos);
}

TEST(Metrics, ZeroTargetIsADivisionHazard) {
  MetricVector t;
  t.set("disk_io_bw", 0.0);
  try {
    accuracy(t, vec({{"disk_io_bw", 5}}));
    FAIL() << "no hazard";
  } catch (const DivisionHazardError& e) {
    EXPECT_EQ(e.metric(), "disk_io_bw");
    EXPECT_STREQ(e.what(), "division hazard: target value of 'disk_io_bw' is zero");
  }
  EXPECT_THROW(relative_deviation("ipc", 0.0, 1.0), DivisionHazardError);
}

TEST(Metrics, DiskBandwidth) {
  IoSample s;
  s.sectors_read = 600;
  s.sectors_written = 400;
  s.sector_size = 512;
  s.runtime = 10;
  EXPECT_DOUBLE_EQ(disk_bandwidth(s), 51200.0);
  s.runtime = 0;
  EXPECT_THROW(disk_bandwidth(s), ValidationError);

  const auto fromb = io_sample_from_bytes(1000, 1, 2.0);
  EXPECT_EQ(fromb.sectors_read, 2);
  EXPECT_EQ(fromb.sectors_written, 1);
}

TEST(Metrics, Speedup) {
  EXPECT_NEAR(speedup(856, 1378), 1.61, 0.005);
  EXPECT_NEAR(speedup(11.02, 1500), 136, 1);
  EXPECT_THROW(speedup(0, 1), ValidationError);
  const SpeedupRow rows[] = {{"terasort", 11.02, 1500}};
  EXPECT_NE(render_speedup_table(rows).find("136.1x"), std::string::npos);
  EXPECT_EQ(render_speedup_csv(rows).rfind("label,time_a,time_b,speedup\n", 0), 0u);
}

TEST(Metrics, SetRejectsInadmissibleValues) {
  MetricVector v;
  EXPECT_THROW(v.set("cache_misses", 1), LookupError);
  EXPECT_THROW(v.set("l1d_hit", 1.4), RangeError);
  EXPECT_THROW(v.set("runtime", 0), RangeError);
  EXPECT_THROW(v.set("mips", -1), RangeError);
  EXPECT_THROW(v.set("ipc", std::nan("")), RangeError);
  EXPECT_NO_THROW(v.set("disk_io_bw", 0));
}

TEST(Metrics, CounterFileRoundtrip) {
  const auto target = load_counter_file(kFixtures / "target.counters");
  EXPECT_EQ(target.size(), 17u);
  EXPECT_EQ(*target.get("disk_io_bw"), 51200.0);
  EXPECT_EQ(ingest_counters(emit_counters(target)), target);

  const auto dir = testing::scratch_dir("metrics");
  save_counter_file(dir / "t.counters", target);
  EXPECT_EQ(load_counter_file(dir / "t.counters"), target);

  SplitMix64 rng(5);
  MetricVector odd;
  odd.set("mem_read_bw", 1e9 * rng.next_unit() + 1);
  odd.set("ipc", rng.next_unit());
  EXPECT_EQ(ingest_counters(emit_counters(odd)), odd);
  EXPECT_THROW(load_counter_file(dir / "missing.counters"), IoError);
}

TEST(Metrics, MalformedCounterFilesReportLine) {
  const struct {
    const char* file;
    std::size_t line;
    const char* token;
  } cases[] = {
      {"unknown_metric.counters", 3, "cache_misses"},
      {"bad_value.counters", 2, "12O0"},
      {"duplicate.counters", 4, "ipc"},
      {"extra_field.counters", 1, "fields"},
  };
  for (const auto& c : cases) {
    try {
      load_counter_file(kFixtures / c.file);
      ADD_FAILURE() << c.file << " parsed";
    } catch (const ParseError& e) {
      EXPECT_EQ(e.line(), c.line) << e.what();
      EXPECT_NE(std::string(e.what()).find(c.token), std::string::npos) << e.what();
    }
  }
  try {
    load_counter_file(kFixtures / "out_of_range.counters");
    ADD_FAILURE() << "out_of_range parsed";
  } catch (const RangeError& e) {
    EXPECT_EQ(e.metric(), "l1d_hit");
    EXPECT_NE(std::string(e.what()).find("line 2:"), std::string::npos) << e.what();
  }
  EXPECT_THROW(load_counter_file(kFixtures / "mix_sum.counters"), RangeError);
}

TEST(Metrics, SoftwareMetricsFromRun) {
  auto dag = load_reference("terasort");
  dag.total_work_budget = 20'000;
  const auto run = execute(dag, 0);
  const auto m = software_metrics(run, SoftwareClock::Modeled);
  const double runtime = *m.get("runtime");
  EXPECT_DOUBLE_EQ(runtime, modeled_runtime(run));
  const double mix = *m.get("ratio_integer") + *m.get("ratio_float") + *m.get("ratio_load") +
                     *m.get("ratio_store") + *m.get("ratio_branch");
  EXPECT_NEAR(mix, 1.0, 1e-9);
  EXPECT_NEAR(*m.get("soft_mips"), static_cast<double>(run.soft_counters.total()) / runtime / 1e6,
              1e-9);
  EXPECT_FALSE(m.has("mips"));
  EXPECT_FALSE(m.has("ipc"));
  EXPECT_EQ(software_metrics(run, SoftwareClock::Modeled), m);
}

TEST(Metrics, ModeledTimeFollowsCostModel) {
  EdgeRun e;
  e.params.parallelism_degree = 4;
  e.report.chunk_work_items = {10, 10};
  e.report.soft_counters.integer_ops = 2'000'000;
  e.report.bytes_read = 1000;
  CostModel m;
  const double expect = 2e6 / (m.op_rate * 2) + 2 * m.chunk_overhead / 2 + 4 * m.spawn_cost +
                        1000 / m.disk_rate;
  EXPECT_NEAR(modeled_edge_time(e, m), expect, 1e-15);
}

TEST(Metrics, Renderers) {
  const auto r = accuracy(vec({{"ipc", 2.0}, {"mips", 10}}), vec({{"ipc", 1.8}}));
  const auto csv = render_accuracy_csv(r);
  EXPECT_NE(csv.find("ipc,0.9"), std::string::npos) << csv;
  EXPECT_NE(csv.find("mips,absent"), std::string::npos) << csv;
  const auto table = render_metric_table(vec({{"ipc", 1.5}}));
  EXPECT_NE(table.find("ipc"), std::string::npos);
  EXPECT_NE(table.find("1.5"), std::string::npos);
}

TEST(Metrics, Names) {
  EXPECT_EQ(metric_names().size(), 18u);
  EXPECT_EQ(mix_metric_names().size(), 5u);
  EXPECT_TRUE(is_metric_name("soft_mips"));
  EXPECT_TRUE(is_fraction_metric("branch_miss"));
  EXPECT_FALSE(is_fraction_metric("ipc"));
}

}  // namespace
}  // namespace dwarfproxy
