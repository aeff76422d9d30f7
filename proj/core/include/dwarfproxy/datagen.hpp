#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace dwarfproxy {

enum class DataKind : std::uint8_t { Text = 0, Vector = 1, Matrix = 2, Graph = 3 };
enum class ValueDistribution : std::uint8_t { Uniform = 0, Normal = 1 };
// PowerLaw is an R-MAT style recursive generator; Uniform picks endpoints uniformly.
enum class GraphModel : std::uint8_t { PowerLaw = 0, Uniform = 1 };

std::string_view to_string(DataKind kind) noexcept;
std::string_view to_string(ValueDistribution dist) noexcept;
std::string_view to_string(GraphModel model) noexcept;
DataKind parse_data_kind(std::string_view text);
ValueDistribution parse_distribution(std::string_view text);
GraphModel parse_graph_model(std::string_view text);

inline constexpr std::uint32_t kTextKeyBytes = 10;

struct ValueRange {
  double lo = 0.0;
  double hi = 1.0;
  bool operator==(const ValueRange&) const = default;
};

struct DataSpec {
  DataKind kind = DataKind::Vector;
  // Records (Text), values (Vector/Matrix) or vertices (Graph).
  std::uint64_t size = 1;
  // Fraction of zero-valued elements, Vector/Matrix only.
  double sparsity = 0.0;
  // Average out-degree, Graph only.
  double edge_factor = 4.0;
  std::uint64_t seed = 0;
  ValueRange value_range{};
  ValueDistribution distribution = ValueDistribution::Uniform;
  GraphModel graph_model = GraphModel::PowerLaw;
  // Text record width; the first kTextKeyBytes bytes are the sort key.
  std::uint32_t record_bytes = 100;
  // Values per row for Vector/Matrix. A trailing partial row is zero-padded by
  // row-oriented kernels.
  std::uint32_t dim = 1;

  // Throws ValidationError naming the first offending field.
  void validate() const;
  bool operator==(const DataSpec&) const = default;
};

struct TextRecords {
  std::uint32_t record_bytes = 100;
  std::vector<std::uint8_t> bytes;

  std::uint64_t count() const noexcept { return record_bytes ? bytes.size() / record_bytes : 0; }
  std::span<const std::uint8_t> record(std::uint64_t i) const noexcept {
    return {bytes.data() + i * record_bytes, record_bytes};
  }
  std::span<const std::uint8_t> key(std::uint64_t i) const noexcept {
    return {bytes.data() + i * record_bytes, kTextKeyBytes};
  }
};

struct NumericData {
  std::uint32_t dim = 1;
  std::vector<double> values;

  std::uint64_t rows() const noexcept { return (values.size() + dim - 1) / dim; }
};

struct GraphEdge {
  std::uint32_t src = 0;
  std::uint32_t dst = 0;
  bool operator==(const GraphEdge&) const = default;
  auto operator<=>(const GraphEdge&) const = default;
};

struct GraphData {
  std::uint32_t vertices = 0;
  std::vector<GraphEdge> edges;
};

using Payload = std::variant<TextRecords, NumericData, GraphData>;

struct Dataset {
  DataSpec spec;
  Payload payload;

  DataKind kind() const noexcept { return spec.kind; }
  std::uint64_t element_count() const noexcept;

  const TextRecords* text() const noexcept { return std::get_if<TextRecords>(&payload); }
  const NumericData* numeric() const noexcept { return std::get_if<NumericData>(&payload); }
  const GraphData* graph() const noexcept { return std::get_if<GraphData>(&payload); }

  // 64-bit digest of the payload bytes and kind; equal datasets have equal digests.
  std::uint64_t digest() const noexcept;

  // Bitwise payload equality (doubles compared by representation).
  friend bool operator==(const Dataset& a, const Dataset& b) noexcept;
};

// Builds the dataset described by spec. Pure and deterministic in spec.
Dataset generate(const DataSpec& spec);

// gensort-style records: a uniformly random 10-byte key followed by a
// printable payload carrying the record index.
Dataset text_records(std::uint64_t count, std::uint32_t record_bytes, std::uint64_t seed);

// Fraction of exactly-zero values; 0 for non-numeric payloads.
double zero_fraction(const Dataset& data) noexcept;

// Returns elements [offset, offset + count) wrapping cyclically past the end.
// For graphs, wrapping appends relabelled copies of the vertex range.
Dataset slice_cyclic(const Dataset& data, std::uint64_t offset, std::uint64_t count);

// Concatenates datasets of one kind (numeric payloads must share dim).
Dataset concatenate(std::span<const Dataset> parts);

// Self-describing binary container: magic, kind tag, spec echo, raw payload.
void write_dataset(std::ostream& out, const Dataset& data);
Dataset read_dataset(std::istream& in);
void save_dataset(const std::filesystem::path& path, const Dataset& data);
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace dwarfproxy
