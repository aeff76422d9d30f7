#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "dwarfproxy/error.hpp"
#include "dwarfproxy/proxydag.hpp"
#include "test_support.hpp"

namespace dwarfproxy {
namespace {

const std::filesystem::path kFixtures = DWARFPROXY_FIXTURE_DIR;
const std::filesystem::path kProxies = DWARFPROXY_PROXY_DIR;

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> rules_of(const ProxyDag& dag) {
  std::vector<std::string> rules;
  for (const auto& v : validate(dag)) rules.push_back(v.rule);
  return rules;
}

bool has_rule(const ProxyDag& dag, const std::string& rule) {
  const auto rules = rules_of(dag);
  return std::find(rules.begin(), rules.end(), rule) != rules.end();
}

ProxyDag chain(std::uint64_t budget = 1000) {
  return parse_proxy(
      "proxy chain\n"
      "budget " + std::to_string(budget) + "\n"
      "node in source kind=vector size=auto seed=3\n"
      "node out sink\n"
      "edge in out sort quick weight=1 chunk=64 par=2\n");
}

ProxyDag diamond() {
  return parse_proxy(
      "proxy diamond\n"
      "budget 2000\n"
      "node src source kind=vector size=auto seed=5\n"
      "node left intermediate\n"
      "node right intermediate\n"
      "node join intermediate\n"
      "node out sink\n"
      "edge src left sort quick weight=0.2 chunk=64 par=2\n"
      "edge src right sort merge weight=0.2 chunk=64 par=2\n"
      "edge left join statistic average weight=0.2 chunk=64 par=1\n"
      "edge right join statistic average weight=0.2 chunk=64 par=1\n"
      "edge join out sort quick weight=0.2 chunk=64 par=1\n");
}

struct MalformedCase {
  const char* file;
  std::size_t line;
  const char* token;
};

TEST(ProxyDag, ReferenceFilesMatchEmbeddedDocuments) {
  for (const auto name : reference_names()) {
    const auto path = kProxies / (std::string(name) + ".proxy");
    EXPECT_EQ(read_text(path), reference_document(name)) << name;
    EXPECT_EQ(load_proxy_file(path), load_reference(name)) << name;
  }
}

TEST(ProxyDag, ReferenceProxiesAreValid) {
  for (const auto name : reference_names()) {
    const auto dag = load_reference(name);
    EXPECT_TRUE(validate(dag).empty()) << name;
    double sum = 0.0;
    for (const auto& e : dag.edges) sum += e.invocation.params.weight;
    EXPECT_NEAR(sum, 1.0, 1e-9) << name;
  }
  EXPECT_THROW(load_reference("wordcount"), LookupError);
  try {
    load_reference("wordcount");
  } catch (const LookupError& e) {
    const std::string msg = e.what();
    for (const auto name : reference_names()) {
      EXPECT_NE(msg.find(name), std::string::npos) << msg;
    }
  }
}

TEST(ProxyDag, TerasortComponentsAndWeights) {
  const auto dag = load_reference("terasort");
  ASSERT_EQ(dag.edges.size(), 3u);
  EXPECT_EQ(dag.edges[0].invocation.dwarf, Dwarf::Sort);
  EXPECT_EQ(dag.edges[1].invocation.dwarf, Dwarf::Sampling);
  EXPECT_EQ(dag.edges[2].invocation.dwarf, Dwarf::Graph);
  EXPECT_DOUBLE_EQ(dag.edges[0].invocation.params.weight, 0.7);
  EXPECT_DOUBLE_EQ(dag.edges[1].invocation.params.weight, 0.1);
  EXPECT_DOUBLE_EQ(dag.edges[2].invocation.params.weight, 0.2);
}

TEST(ProxyDag, KmeansAndSiftComponents) {
  const auto variants = [](const ProxyDag& dag) {
    std::vector<std::string> out;
    for (const auto& e : dag.edges) {
      out.push_back(std::string(to_string(e.invocation.dwarf)) + "/" + e.invocation.variant);
    }
    return out;
  };
  const auto contains = [](const std::vector<std::string>& v, const std::string& x) {
    return std::find(v.begin(), v.end(), x) != v.end();
  };
  const auto kmeans = variants(load_reference("kmeans"));
  for (const auto* want : {"matrix/euclidean_distance", "matrix/cosine_distance", "sort/quick",
                           "statistic/count", "statistic/average"}) {
    EXPECT_TRUE(contains(kmeans, want)) << want;
  }
  const auto sift = variants(load_reference("sift"));
  EXPECT_TRUE(contains(sift, "transform/fft"));
  EXPECT_TRUE(contains(sift, "transform/ifft"));
}

TEST(ProxyDag, SerializeParseRoundtrip) {
  for (const auto name : reference_names()) {
    const auto dag = load_reference(name);
    EXPECT_EQ(parse_proxy(serialize(dag)), dag) << name;
  }
  const auto d = diamond();
  EXPECT_EQ(parse_proxy(serialize(d)), d);
}

TEST(ProxyDag, FileRoundtrip) {
  const auto dir = testing::scratch_dir("proxydag-file");
  const auto dag = load_reference("pagerank");
  save_proxy_file(dir / "p.proxy", dag);
  EXPECT_EQ(load_proxy_file(dir / "p.proxy"), dag);
  EXPECT_THROW(load_proxy_file(dir / "missing.proxy"), IoError);
}

TEST(ProxyDag, MalformedFilesReportLineAndToken) {
  const MalformedCase cases[] = {
      {"bad_dwarf.proxy", 5, "fourier"},
      {"bad_variant.proxy", 4, "unknown sort variant"},
      {"missing_weight.proxy", 6, "weight="},
      {"bad_number.proxy", 5, "heavy"},
      {"unknown_directive.proxy", 4, "connect"},
      {"no_header.proxy", 1, "proxy <name>"},
      {"bad_source_attr.proxy", 2, "colour"},
  };
  for (const auto& c : cases) {
    try {
      load_proxy_file(kFixtures / c.file);
      ADD_FAILURE() << c.file << " parsed";
    } catch (const ParseError& e) {
      const std::string msg = e.what();
      EXPECT_EQ(e.line(), c.line) << c.file << ": " << msg;
      EXPECT_EQ(msg.rfind("line " + std::to_string(c.line) + ": ", 0), 0u) << msg;
      EXPECT_NE(msg.find(c.token), std::string::npos) << msg;
    }
  }
}

TEST(ProxyDag, ParseSeparatesStructureFromValidation) {
  const auto cyc = load_proxy_file(kFixtures / "cycle.proxy");
  EXPECT_TRUE(has_rule(cyc, "cycle"));
  const auto violations = validate(cyc);
  const auto it = std::find_if(violations.begin(), violations.end(),
                               [](const Violation& v) { return v.rule == "cycle"; });
  ASSERT_NE(it, violations.end());
  EXPECT_NE(it->to_string().find("cycle: "), std::string::npos);
  EXPECT_NE(it->message.find('x'), std::string::npos);
  EXPECT_NE(it->message.find('y'), std::string::npos);

  const auto lop = load_proxy_file(kFixtures / "weights.proxy");
  EXPECT_TRUE(has_rule(lop, "weights"));
  EXPECT_THROW(execute(lop, 0), ValidationError);
}

TEST(ProxyDag, WeightSumRule) {
  auto dag = parse_proxy(
      "proxy w\nbudget 100\nnode a source kind=vector size=auto seed=1\nnode b sink\nnode c sink\n"
      "edge a b sort quick weight=0.5 chunk=8 par=1\n"
      "edge a c sort quick weight=0.6 chunk=8 par=1\n");
  const auto violations = validate(dag);
  ASSERT_EQ(violations.size(), 1u);
  EXPECT_EQ(violations[0].rule, "weights");
  EXPECT_EQ(violations[0].subject, "dag");
  EXPECT_NE(violations[0].message.find("1.1"), std::string::npos) << violations[0].message;
  dag.edges[1].invocation.params.weight = 0.5;
  EXPECT_TRUE(validate(dag).empty());
}

TEST(ProxyDag, StructuralRules) {
  auto dag = chain();
  dag.nodes[1].role = NodeRole::Source;
  EXPECT_TRUE(has_rule(dag, "source-inbound") || has_rule(dag, "dataspec"));

  dag = chain();
  dag.edges[0].to = "nowhere";
  EXPECT_TRUE(has_rule(dag, "unknown-node"));

  dag = chain();
  dag.nodes.push_back({"lonely", NodeRole::Sink, {}});
  EXPECT_TRUE(has_rule(dag, "no-inbound") || has_rule(dag, "isolated"));

  dag = chain();
  dag.nodes.push_back(dag.nodes[1]);
  EXPECT_TRUE(has_rule(dag, "duplicate"));

  dag = chain();
  dag.edges.clear();
  EXPECT_TRUE(has_rule(dag, "edges"));

  dag = chain();
  dag.edges[0].invocation.params.chunk_size = 0;
  EXPECT_TRUE(has_rule(dag, "chunk"));

  dag = chain();
  dag.edges[0].invocation.params.parallelism_degree = 0;
  EXPECT_TRUE(has_rule(dag, "parallelism"));

  dag = chain();
  dag.edges[0].invocation.variant = "bogo";
  EXPECT_TRUE(has_rule(dag, "variant"));

  dag = chain();
  dag.total_work_budget = 0;
  EXPECT_TRUE(has_rule(dag, "budget"));
}

TEST(ProxyDag, ViolationsNameTheirSubject) {
  auto dag = chain();
  dag.edges[0].invocation.params.chunk_size = 0;
  const auto violations = validate(dag);
  ASSERT_FALSE(violations.empty());
  EXPECT_EQ(violations[0].subject, "edge 0");
}

TEST(ProxyDag, SingleEdgeRunHasOneReport) {
  const auto run = execute(chain(), 1);
  ASSERT_EQ(run.per_edge.size(), 1u);
  EXPECT_EQ(run.per_edge[0].report.work_items, 1000u);
  EXPECT_EQ(run.work_items, 1000u);
}

TEST(ProxyDag, DiamondRunsEveryEdgeOnceInDependencyOrder) {
  ExecuteOptions opts;
  opts.retain_outputs = true;
  const auto dag = diamond();
  const auto run = execute(dag, 2, opts);
  ASSERT_EQ(run.per_edge.size(), dag.edges.size());
  for (std::size_t i = 0; i < run.per_edge.size(); ++i) EXPECT_EQ(run.per_edge[i].edge, i);

  const auto& join = run.node_outputs.at("join");
  EXPECT_EQ(join.element_count(),
            run.per_edge[2].output_elements + run.per_edge[3].output_elements);

  for (std::size_t i = 0; i < dag.edges.size(); ++i) {
    for (std::size_t j = 0; j < dag.edges.size(); ++j) {
      if (dag.edges[j].to == dag.edges[i].from) {
        EXPECT_GE(run.per_edge[i].start, run.per_edge[j].finish) << i << " after " << j;
      }
    }
  }
}

TEST(ProxyDag, AggregatesEqualPerEdgeSums) {
  const auto run = execute(load_reference("kmeans"), 3);
  std::uint64_t read = 0, written = 0, work = 0, ops = 0;
  for (const auto& e : run.per_edge) {
    read += e.report.bytes_read;
    written += e.report.bytes_written;
    work += e.report.work_items;
    ops += e.report.soft_counters.total();
  }
  EXPECT_EQ(run.bytes_read, read);
  EXPECT_EQ(run.bytes_written, written);
  EXPECT_EQ(run.work_items, work);
  EXPECT_EQ(run.soft_counters.total(), ops);
}

TEST(ProxyDag, TerasortWorkFollowsWeights) {
  auto dag = load_reference("terasort");
  dag.total_work_budget = 1'000'000;
  const auto run = execute(dag, 0);
  ASSERT_EQ(run.per_edge.size(), 3u);
  const double weights[] = {0.7, 0.1, 0.2};
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double expect = weights[i] * 1e6;
    EXPECT_LE(std::abs(static_cast<double>(run.per_edge[i].report.work_items) - expect), 1.0) << i;
    total += run.per_edge[i].report.work_items;
  }
  EXPECT_LE(std::abs(static_cast<double>(total) - 1e6), 3.0);
}

TEST(ProxyDag, RaisingAWeightRaisesItsWork) {
  auto dag = load_reference("kmeans");
  const auto before = edge_input_size(dag, 0);
  dag.edges[0].invocation.params.weight = 0.3;
  dag.edges[1].invocation.params.weight = 0.1;
  EXPECT_GT(edge_input_size(dag, 0), before);
  EXPECT_EQ(edge_input_size(dag, 1), 100'000u);
}

TEST(ProxyDag, EffectiveParamsClampChunk) {
  auto dag = chain(100);
  dag.edges[0].invocation.params.chunk_size = 5000;
  const auto p = effective_params(dag, 0);
  EXPECT_EQ(p.input_data_size, 100u);
  EXPECT_EQ(p.chunk_size, 100u);
  apply_budget(dag);
  EXPECT_EQ(dag.edges[0].invocation.params.input_data_size, 100u);
}

TEST(ProxyDag, ExecutionIsDeterministicInSeed) {
  for (const auto name : reference_names()) {
    auto dag = load_reference(name);
    dag.total_work_budget = 50'000;
    const auto a = execute(dag, 9);
    const auto b = execute(dag, 9);
    EXPECT_EQ(a.node_digests, b.node_digests) << name;
    ASSERT_EQ(a.per_edge.size(), b.per_edge.size());
    for (std::size_t i = 0; i < a.per_edge.size(); ++i) {
      EXPECT_EQ(a.per_edge[i].report.work_items, b.per_edge[i].report.work_items);
      EXPECT_EQ(a.per_edge[i].output_digest, b.per_edge[i].output_digest);
    }
    ExecuteOptions serial;
    serial.serial = true;
    EXPECT_EQ(execute(dag, 9, serial).node_digests, a.node_digests) << name;
  }
}

TEST(ProxyDag, CacheReusesSourceDatasets) {
  DatasetCache cache;
  ExecuteOptions opts;
  opts.cache = &cache;
  auto dag = load_reference("terasort");
  dag.total_work_budget = 10'000;
  const auto a = execute(dag, 1, opts);
  const auto n = cache.size();
  EXPECT_EQ(n, 2u);
  const auto b = execute(dag, 1, opts);
  EXPECT_EQ(cache.size(), n);
  EXPECT_EQ(a.node_digests, b.node_digests);
}

TEST(ProxyDag, SpillDirectoryComesFromEnvironment) {
  const auto dir = testing::scratch_dir("proxydag-spill");
  const char* old = std::getenv("DWARFPROXY_SPILL_DIR");
  const std::string saved = old ? old : "";
  ::setenv("DWARFPROXY_SPILL_DIR", dir.c_str(), 1);
  EXPECT_EQ(default_spill_root(), dir);
  auto dag = load_reference("terasort");
  dag.total_work_budget = 20'000;
  EXPECT_NO_THROW(execute(dag, 0));
  if (old) {
    ::setenv("DWARFPROXY_SPILL_DIR", saved.c_str(), 1);
  } else {
    ::unsetenv("DWARFPROXY_SPILL_DIR");
  }
}

TEST(ProxyDag, UnwritableSpillRootAbortsWithPartialReports) {
  auto dag = load_reference("terasort");
  dag.total_work_budget = 20'000;
  const auto file = testing::scratch_dir("proxydag-badspill") / "not-a-dir";
  std::ofstream(file) << "x";
  ExecuteOptions opts;
  opts.serial = true;
  opts.spill_root = file / "sub";
  try {
    execute(dag, 0, opts);
    ADD_FAILURE() << "spill into a regular file succeeded";
  } catch (const ExecutionError& e) {
    EXPECT_EQ(e.edge(), 0u);
    EXPECT_NE(e.label().find("sort"), std::string::npos);
    for (const auto& r : e.partial().per_edge) EXPECT_NE(r.edge, 0u);
  }
}

TEST(ProxyDag, RunResultRoundtrip) {
  auto dag = load_reference("sift");
  dag.total_work_budget = 20'000;
  const auto run = execute(dag, 4);
  std::stringstream buf;
  write_run_result(buf, run);
  const auto back = read_run_result(buf);
  EXPECT_EQ(back.proxy, run.proxy);
  EXPECT_EQ(back.seed, run.seed);
  EXPECT_EQ(back.work_items, run.work_items);
  EXPECT_EQ(back.bytes_read, run.bytes_read);
  EXPECT_EQ(back.bytes_written, run.bytes_written);
  EXPECT_EQ(back.soft_counters.total(), run.soft_counters.total());
  EXPECT_EQ(back.node_digests, run.node_digests);
  ASSERT_EQ(back.per_edge.size(), run.per_edge.size());
  for (std::size_t i = 0; i < run.per_edge.size(); ++i) {
    EXPECT_EQ(back.per_edge[i].label, run.per_edge[i].label);
    EXPECT_EQ(back.per_edge[i].params, run.per_edge[i].params);
    EXPECT_EQ(back.per_edge[i].report.work_items, run.per_edge[i].report.work_items);
    EXPECT_EQ(back.per_edge[i].output_digest, run.per_edge[i].output_digest);
  }
  std::stringstream bad("proxy x\nbogus_key 1\n");
  EXPECT_THROW(read_run_result(bad), ParseError);
}

TEST(ProxyDag, NamesParse) {
  EXPECT_EQ(parse_node_role("sink"), NodeRole::Sink);
  EXPECT_THROW(parse_node_role("middle"), ValidationError);
  EXPECT_EQ(edge_label(load_reference("terasort"), 0), "e0 records->sorted sort/quick");
}

}  // namespace
}  // namespace dwarfproxy
