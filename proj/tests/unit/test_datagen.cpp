#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "dwarfproxy/datagen.hpp"
#include "dwarfproxy/error.hpp"
#include "test_support.hpp"

namespace dwarfproxy {
namespace {

DataSpec vector_spec(std::uint64_t size, double sparsity, std::uint64_t seed) {
  DataSpec s;
  s.kind = DataKind::Vector;
  s.size = size;
  s.sparsity = sparsity;
  s.seed = seed;
  return s;
}

std::string field_of(const DataSpec& spec) {
  try {
    spec.validate();
  } catch (const ValidationError& e) {
    return e.field();
  }
  return "";
}

TEST(Datagen, SparseVectorZeroFractionNearTarget) {
  const auto d = generate(vector_spec(1'000'000, 0.9, 7));
  EXPECT_EQ(d.element_count(), 1'000'000u);
  const double z = zero_fraction(d);
  EXPECT_GE(z, 0.89);
  EXPECT_LE(z, 0.91);
}

TEST(Datagen, ZeroSparsityHasNoZeros) {
  const auto d = generate(vector_spec(10, 0.0, 1));
  ASSERT_NE(d.numeric(), nullptr);
  for (const double v : d.numeric()->values) EXPECT_NE(v, 0.0);
}

TEST(Datagen, FullSparsityIsAllZero) {
  const auto d = generate(vector_spec(1000, 1.0, 1));
  EXPECT_EQ(zero_fraction(d), 1.0);
}

TEST(Datagen, CalibrationHoldsAcrossSparsities) {
  for (const double s : {0.0, 0.25, 0.5, 0.75, 0.99}) {
    DataSpec spec = vector_spec(200'000, s, 11);
    spec.kind = DataKind::Matrix;
    spec.dim = 8;
    EXPECT_LT(std::abs(zero_fraction(generate(spec)) - s), 0.01) << "sparsity " << s;
  }
}

TEST(Datagen, ValuesStayInRange) {
  DataSpec spec = vector_spec(50'000, 0.0, 3);
  spec.value_range = {2.0, 5.0};
  for (const auto dist : {ValueDistribution::Uniform, ValueDistribution::Normal}) {
    spec.distribution = dist;
    const auto d = generate(spec);
    const auto [lo, hi] = std::minmax_element(d.numeric()->values.begin(), d.numeric()->values.end());
    EXPECT_GE(*lo, 2.0);
    EXPECT_LE(*hi, 5.0);
  }
}

TEST(Datagen, SameSpecIsBitIdentical) {
  for (const auto kind : {DataKind::Text, DataKind::Vector, DataKind::Matrix, DataKind::Graph}) {
    DataSpec spec;
    spec.kind = kind;
    spec.size = 5000;
    spec.seed = 99;
    spec.sparsity = kind == DataKind::Vector ? 0.3 : 0.0;
    spec.dim = kind == DataKind::Matrix ? 4 : 1;
    const auto a = generate(spec);
    const auto b = generate(spec);
    EXPECT_TRUE(a == b) << to_string(kind);
    EXPECT_EQ(a.digest(), b.digest());
    spec.seed = 100;
    EXPECT_FALSE(a == generate(spec)) << to_string(kind);
  }
}

TEST(Datagen, GraphEdgeCountMatchesEdgeFactor) {
  DataSpec spec;
  spec.kind = DataKind::Graph;
  spec.size = 1024;
  spec.edge_factor = 4;
  spec.seed = 3;
  for (const auto model : {GraphModel::PowerLaw, GraphModel::Uniform}) {
    spec.graph_model = model;
    const auto d = generate(spec);
    const auto& g = *d.graph();
    EXPECT_EQ(g.vertices, 1024u);
    EXPECT_EQ(g.edges.size(), 4096u);
    for (const auto& e : g.edges) {
      EXPECT_NE(e.src, e.dst);
      EXPECT_LT(e.src, 1024u);
      EXPECT_LT(e.dst, 1024u);
    }
  }
}

TEST(Datagen, PowerLawGraphIsSkewed) {
  DataSpec spec;
  spec.kind = DataKind::Graph;
  spec.size = 4096;
  spec.edge_factor = 8;
  spec.seed = 5;
  const auto degrees = [&](GraphModel model) {
    spec.graph_model = model;
    const auto d = generate(spec);
    std::vector<std::uint32_t> deg(4096, 0);
    for (const auto& e : d.graph()->edges) ++deg[e.src];
    return *std::max_element(deg.begin(), deg.end());
  };
  EXPECT_GT(degrees(GraphModel::PowerLaw), 3 * degrees(GraphModel::Uniform));
}

TEST(Datagen, TextRecordBookkeeping) {
  const auto d = text_records(100, 100, 5);
  ASSERT_NE(d.text(), nullptr);
  EXPECT_EQ(d.text()->count(), 100u);
  EXPECT_EQ(d.text()->bytes.size(), 10'000u);

  const auto one = text_records(1, 10, 0);
  EXPECT_EQ(one.text()->count(), 1u);
  EXPECT_EQ(one.text()->key(0).size(), one.text()->record(0).size());
}

TEST(Datagen, TextKeysRepeatUnderSameSeed) {
  const auto count_dupes = [](const Dataset& d) {
    std::map<std::string, int> keys;
    for (std::uint64_t i = 0; i < d.text()->count(); ++i) {
      const auto k = d.text()->key(i);
      ++keys[std::string(k.begin(), k.end())];
    }
    return d.text()->count() - keys.size();
  };
  const auto a = text_records(10'000, 100, 5);
  const auto b = text_records(10'000, 100, 5);
  EXPECT_EQ(count_dupes(a), count_dupes(b));
  EXPECT_TRUE(a == b);
}

TEST(Datagen, InvalidSpecsNameTheField) {
  DataSpec s = vector_spec(10, 1.5, 0);
  EXPECT_EQ(field_of(s), "sparsity");
  s = vector_spec(0, 0.0, 0);
  EXPECT_EQ(field_of(s), "size");
  s = vector_spec(10, 0.0, 0);
  s.edge_factor = -1;
  EXPECT_EQ(field_of(s), "edge_factor");
  s = vector_spec(10, 0.0, 0);
  s.dim = 0;
  EXPECT_EQ(field_of(s), "dim");
  s = vector_spec(10, 0.0, 0);
  s.value_range = {3.0, 1.0};
  EXPECT_EQ(field_of(s), "value_range");
  s.kind = DataKind::Text;
  s.value_range = {};
  s.record_bytes = 9;
  EXPECT_EQ(field_of(s), "record_bytes");
  EXPECT_THROW(text_records(10, 9, 0), ValidationError);
  EXPECT_THROW(generate(vector_spec(10, -0.1, 0)), ValidationError);
}

TEST(Datagen, NamesParseAndPrint) {
  for (const auto k : {DataKind::Text, DataKind::Vector, DataKind::Matrix, DataKind::Graph}) {
    EXPECT_EQ(parse_data_kind(to_string(k)), k);
  }
  EXPECT_EQ(parse_distribution("normal"), ValueDistribution::Normal);
  EXPECT_EQ(parse_graph_model("uniform"), GraphModel::Uniform);
  EXPECT_THROW(parse_data_kind("tensor"), ValidationError);
}

TEST(Datagen, ContainerRoundtripEveryKind) {
  for (const auto kind : {DataKind::Text, DataKind::Vector, DataKind::Matrix, DataKind::Graph}) {
    DataSpec spec;
    spec.kind = kind;
    spec.size = 777;
    spec.seed = 4;
    spec.dim = kind == DataKind::Matrix ? 3 : 1;
    spec.sparsity = kind == DataKind::Vector ? 0.5 : 0.0;
    const auto d = generate(spec);
    std::stringstream buf;
    write_dataset(buf, d);
    const auto back = read_dataset(buf);
    EXPECT_TRUE(back == d) << to_string(kind);
    EXPECT_EQ(back.spec, d.spec);
  }
}

TEST(Datagen, ContainerFileRoundtrip) {
  const auto dir = testing::scratch_dir("datagen");
  const auto d = generate(vector_spec(1000, 0.9, 7));
  save_dataset(dir / "v.bin", d);
  EXPECT_TRUE(load_dataset(dir / "v.bin") == d);
  EXPECT_THROW(load_dataset(dir / "missing.bin"), IoError);
}

TEST(Datagen, CorruptContainerIsRejected) {
  std::stringstream bad("NOTADATASET-----");
  EXPECT_THROW(read_dataset(bad), ParseError);

  const auto d = generate(vector_spec(100, 0.0, 1));
  std::stringstream buf;
  write_dataset(buf, d);
  const auto bytes = buf.str();
  std::stringstream truncated(bytes.substr(0, bytes.size() / 2));
  EXPECT_THROW(read_dataset(truncated), Error);
}

TEST(Datagen, SliceCyclicWrapsAround) {
  const auto d = testing::numeric({1, 2, 3, 4});
  const auto s = slice_cyclic(d, 2, 6);
  EXPECT_EQ(s.numeric()->values, (std::vector<double>{3, 4, 1, 2, 3, 4}));
}

TEST(Datagen, ConcatenateJoinsPayloads) {
  const std::vector<Dataset> parts = {testing::numeric({1, 2}), testing::numeric({3})};
  const auto joined = concatenate(parts);
  EXPECT_EQ(joined.numeric()->values, (std::vector<double>{1, 2, 3}));
  const std::vector<Dataset> mixed = {testing::numeric({1}), text_records(1, 10, 0)};
  EXPECT_THROW(concatenate(mixed), InputKindError);
}

}  // namespace
}  // namespace dwarfproxy
