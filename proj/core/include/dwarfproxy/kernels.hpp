#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dwarfproxy/datagen.hpp"

namespace dwarfproxy {

// The eight dwarf classes.
enum class Dwarf : std::uint8_t {
  Matrix,
  Sampling,
  Logic,
  Transform,
  Set,
  Graph,
  Sort,
  BasicStatistic,
};

std::string_view to_string(Dwarf dwarf) noexcept;
Dwarf parse_dwarf(std::string_view text);
// Variant names accepted by each dwarf, in declaration order.
std::span<const std::string_view> variants_of(Dwarf dwarf) noexcept;
bool is_valid_variant(Dwarf dwarf, std::string_view variant) noexcept;

// The four tunables of a dwarf component.
struct KernelParams {
  std::uint64_t input_data_size = 1;
  // Elements handed to one worker task.
  std::uint64_t chunk_size = 1;
  std::uint32_t parallelism_degree = 1;
  // Share of the proxy's work budget; consumed by the DAG executor only.
  double weight = 1.0;

  void validate() const;
  bool operator==(const KernelParams&) const = default;
};

// Variant-specific knobs that are not tuned.
struct KernelOptions {
  double fraction = 0.1;       // sampling
  std::uint32_t bins = 10;     // histogram_probability
  std::uint32_t hashes = 128;  // minhash_signature
  std::uint64_t key = 0x5eed;  // xor_cipher, hash salt
  std::uint32_t centroids = 8; // distance kernels without an explicit second operand

  bool operator==(const KernelOptions&) const = default;
};

struct KernelInvocation {
  Dwarf dwarf = Dwarf::Sort;
  std::string variant = "quick";
  KernelParams params;
  bool spill_intermediate = false;
  KernelOptions options;

  void validate() const;
  bool operator==(const KernelInvocation&) const = default;
};

// Abstract per-category operation tallies of instrumented kernels.
struct OpCounters {
  std::uint64_t integer_ops = 0;
  std::uint64_t float_ops = 0;
  std::uint64_t loads = 0;
  std::uint64_t stores = 0;
  std::uint64_t branches = 0;

  std::uint64_t total() const noexcept {
    return integer_ops + float_ops + loads + stores + branches;
  }
  OpCounters& operator+=(const OpCounters& o) noexcept {
    integer_ops += o.integer_ops;
    float_ops += o.float_ops;
    loads += o.loads;
    stores += o.stores;
    branches += o.branches;
    return *this;
  }
  bool operator==(const OpCounters&) const = default;
};

struct KernelReport {
  double wall_time = 0.0;
  std::uint64_t bytes_read = 0;
  std::uint64_t bytes_written = 0;
  std::uint64_t work_items = 0;
  OpCounters soft_counters;
  // Per-chunk element counts; sums to work_items.
  std::vector<std::uint64_t> chunk_work_items;
  std::uint32_t parallelism = 1;
  // Zero elements appended to reach power-of-two transform lengths.
  std::uint64_t pad_count = 0;
};

struct KernelResult {
  Dataset output;
  KernelReport report;
};

// Where spilled chunk outputs go. Defaults to $DWARFPROXY_SPILL_DIR, then the
// system temp directory.
std::filesystem::path default_spill_root();

struct KernelContext {
  bool spill_intermediate = false;
  std::filesystem::path spill_root = default_spill_root();
  // Seeds randomized variants (random sampling).
  std::uint64_t seed = 0;
  KernelOptions options{};
};

enum class SortVariant { Quick, Merge };
enum class SamplingVariant { Random, Interval };
enum class GraphVariant { Construct, Bfs, ConnectedComponents, DegreeCount };
enum class MatrixVariant { Construct, Multiply, EuclideanDistance, CosineDistance };
enum class TransformVariant { Fft, Ifft, Dct };
enum class SetVariant { Union, Intersection, Difference, Jaccard };
enum class LogicVariant { Hash, XorCipher, MinhashSignature };
enum class StatisticVariant { Count, Average, MinMax, HistogramProbability };

// Each run_* consumes the first params.input_data_size elements of its input.
// Output is identical for every parallelism_degree.

// Text sorted by full record (key first); numeric sorted by value.
KernelResult run_sort(const Dataset& data, SortVariant variant, const KernelParams& params,
                      const KernelContext& ctx = {});

// Random keeps each element independently with probability `fraction`;
// interval keeps indices that are multiples of round(1 / fraction).
KernelResult run_sampling(const Dataset& data, SamplingVariant variant, double fraction,
                          const KernelParams& params, const KernelContext& ctx = {});

// construct: deduplicated, source-ordered edge list (Graph).
// bfs: visit order over out-edges from vertex 0, restarting at the lowest
//      unvisited vertex (Vector).
// connected_components: per-vertex label = smallest vertex id in its weakly
//      connected component (Vector).
// degree_count: per-vertex (out, in) degree rows (Matrix, dim 2).
KernelResult run_graph(const Dataset& data, GraphVariant variant, const KernelParams& params,
                       const KernelContext& ctx = {});

// construct: rows scaled to unit L1 norm. multiply: A x B, where B defaults to
// the leading dim x dim block of A. Distances: every row of A against each row
// of B (default: the first `centroids` rows of A). Output rows are row-major.
KernelResult run_matrix(const Dataset& a, const Dataset* b, MatrixVariant variant,
                        const KernelParams& params, const KernelContext& ctx = {});

// Per chunk, padded with zeros to the next power of two. dim 1 input is real,
// dim 2 input is interleaved (re, im). fft/ifft emit dim 2; dct emits dim 1.
KernelResult run_transform(const Dataset& data, TransformVariant variant,
                           const KernelParams& params, const KernelContext& ctx = {});

// Consumes min(|a|, n) elements of a and the remaining ones from b. Set outputs are the
// sorted distinct elements; jaccard emits a single value.
KernelResult run_set(const Dataset& a, const Dataset& b, SetVariant variant,
                     const KernelParams& params, const KernelContext& ctx = {});

// hash: 53-bit digest per element. xor_cipher: keyed XOR keystream (an
// involution). minhash_signature: `hashes` minimum hash values.
KernelResult run_logic(const Dataset& data, LogicVariant variant, const KernelParams& params,
                       const KernelContext& ctx = {});

// count: per-column argmin tallies over rows (dim 1: total row count).
// average: per-column means. min_max: (min, max). histogram_probability:
// `bins` equal-width bin probabilities over [min, max].
KernelResult run_statistic(const Dataset& data, StatisticVariant variant,
                           const KernelParams& params, const KernelContext& ctx = {});

// Dispatches on invocation.dwarf / variant. `b` is only used by set and matrix.
KernelResult run_kernel(const KernelInvocation& invocation, const Dataset& a,
                        const Dataset* b = nullptr, std::uint64_t seed = 0);
KernelResult run_kernel(const KernelInvocation& invocation, const Dataset& a, const Dataset* b,
                        std::uint64_t seed, const std::filesystem::path& spill_root);

// Estimated Jaccard similarity from two minhash signatures of equal length.
double minhash_similarity(const Dataset& signature_a, const Dataset& signature_b);

}  // namespace dwarfproxy
