#include "kernel_support.hpp"

#include <array>
#include <cstdlib>
#include <unistd.h>

#include "dwarfproxy/random.hpp"

namespace dwarfproxy {

namespace {

constexpr std::array<std::string_view, 2> kSortVariants = {"quick", "merge"};
constexpr std::array<std::string_view, 2> kSamplingVariants = {"random", "interval"};
constexpr std::array<std::string_view, 4> kGraphVariants = {"construct", "bfs",
                                                            "connected_components",
                                                            "degree_count"};
constexpr std::array<std::string_view, 4> kMatrixVariants = {"construct", "multiply",
                                                             "euclidean_distance",
                                                             "cosine_distance"};
constexpr std::array<std::string_view, 3> kTransformVariants = {"fft", "ifft", "dct"};
constexpr std::array<std::string_view, 4> kSetVariants = {"union", "intersection", "difference",
                                                          "jaccard"};
constexpr std::array<std::string_view, 3> kLogicVariants = {"hash", "xor_cipher",
                                                            "minhash_signature"};
constexpr std::array<std::string_view, 4> kStatisticVariants = {"count", "average", "min_max",
                                                                "histogram_probability"};

}  // namespace

std::string_view to_string(Dwarf dwarf) noexcept {
  switch (dwarf) {
    case Dwarf::Matrix: return "matrix";
    case Dwarf::Sampling: return "sampling";
    case Dwarf::Logic: return "logic";
    case Dwarf::Transform: return "transform";
    case Dwarf::Set: return "set";
    case Dwarf::Graph: return "graph";
    case Dwarf::Sort: return "sort";
    case Dwarf::BasicStatistic: return "statistic";
  }
  return "?";
}

Dwarf parse_dwarf(std::string_view text) {
  for (auto d : {Dwarf::Matrix, Dwarf::Sampling, Dwarf::Logic, Dwarf::Transform, Dwarf::Set,
                 Dwarf::Graph, Dwarf::Sort, Dwarf::BasicStatistic}) {
    if (to_string(d) == text) return d;
  }
  throw LookupError("unknown dwarf '" + std::string(text) +
                    "' (expected matrix, sampling, logic, transform, set, graph, sort, "
                    "statistic)");
}

std::span<const std::string_view> variants_of(Dwarf dwarf) noexcept {
  switch (dwarf) {
    case Dwarf::Matrix: return kMatrixVariants;
    case Dwarf::Sampling: return kSamplingVariants;
    case Dwarf::Logic: return kLogicVariants;
    case Dwarf::Transform: return kTransformVariants;
    case Dwarf::Set: return kSetVariants;
    case Dwarf::Graph: return kGraphVariants;
    case Dwarf::Sort: return kSortVariants;
    case Dwarf::BasicStatistic: return kStatisticVariants;
  }
  return {};
}

bool is_valid_variant(Dwarf dwarf, std::string_view variant) noexcept {
  for (auto v : variants_of(dwarf)) {
    if (v == variant) return true;
  }
  return false;
}

void KernelParams::validate() const {
  if (input_data_size < 1) throw ValidationError("input_data_size", "must be at least 1");
  if (chunk_size < 1) throw ValidationError("chunk_size", "must be at least 1");
  if (parallelism_degree < 1) throw ValidationError("parallelism_degree", "must be at least 1");
  if (!(weight > 0.0 && weight <= 1.0)) throw ValidationError("weight", "must lie in (0, 1]");
  if (chunk_size > input_data_size) {
    throw ValidationError("chunk_size", "chunk_size " + std::to_string(chunk_size) +
                                            " exceeds input_data_size " +
                                            std::to_string(input_data_size));
  }
}

void KernelInvocation::validate() const {
  if (!is_valid_variant(dwarf, variant)) {
    throw ValidationError("variant", "'" + variant + "' is not a " +
                                         std::string(to_string(dwarf)) + " variant");
  }
  params.validate();
  if (dwarf == Dwarf::Sampling && !(options.fraction > 0.0 && options.fraction <= 1.0)) {
    throw ValidationError("fraction", "must lie in (0, 1]");
  }
  if (options.bins < 1) throw ValidationError("bins", "must be at least 1");
  if (options.hashes < 1) throw ValidationError("hashes", "must be at least 1");
  if (options.centroids < 1) throw ValidationError("centroids", "must be at least 1");
}

std::filesystem::path default_spill_root() {
  if (const char* env = std::getenv("DWARFPROXY_SPILL_DIR"); env && *env) return env;
  std::error_code ec;
  auto tmp = std::filesystem::temp_directory_path(ec);
  return ec ? std::filesystem::path("/tmp") : tmp;
}

namespace detail {

void check_input(const char* kernel, const Dataset& data, const KernelParams& params,
                 std::initializer_list<DataKind> accepted) {
  bool ok = false;
  for (auto k : accepted) ok = ok || data.kind() == k;
  if (!ok) {
    std::string expected;
    for (auto k : accepted) {
      if (!expected.empty()) expected += "|";
      expected += to_string(k);
    }
    throw InputKindError(std::string(kernel) + " expects " + expected + " input, got " +
                         std::string(to_string(data.kind())));
  }
  params.validate();
  if (data.element_count() < params.input_data_size) {
    throw ValidationError("input_data_size",
                          "requests " + std::to_string(params.input_data_size) +
                              " elements but input holds " + std::to_string(data.element_count()));
  }
}

std::vector<ChunkRange> row_chunks(std::uint64_t values, std::uint32_t dim,
                                   std::uint64_t chunk_size) {
  const std::uint64_t rows_per_chunk = std::max<std::uint64_t>(1, chunk_size / dim);
  auto chunks = make_chunks(values, rows_per_chunk * dim);
  return chunks;
}

SpillArea::SpillArea(const std::filesystem::path& root) {
  static std::atomic<std::uint64_t> counter{0};
  const auto id = counter.fetch_add(1);
  dir_ = root / ("dwarfproxy-spill-" + std::to_string(::getpid()) + "-" + std::to_string(id));
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw IoError("cannot create spill directory " + dir_.string() + ": " + ec.message());
}

SpillArea::~SpillArea() {
  std::error_code ec;
  std::filesystem::remove_all(dir_, ec);
}

std::filesystem::path SpillArea::file(std::size_t chunk) const {
  return dir_ / ("chunk-" + std::to_string(chunk) + ".bin");
}

}  // namespace detail

}  // namespace dwarfproxy
