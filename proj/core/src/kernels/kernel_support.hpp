#pragma once

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <mutex>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include "dwarfproxy/datagen.hpp"
#include "dwarfproxy/error.hpp"
#include "dwarfproxy/kernels.hpp"
#include "dwarfproxy/parallel.hpp"

namespace dwarfproxy::detail {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    const auto dt = std::chrono::steady_clock::now() - start_;
    // Clock granularity can report 0 for tiny runs; a completed run is never instantaneous.
    return std::max(std::chrono::duration<double>(dt).count(), 1e-9);
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

// Validates params against the input and the kinds the kernel accepts.
void check_input(const char* kernel, const Dataset& data, const KernelParams& params,
                 std::initializer_list<DataKind> accepted);

// Chunks aligned to whole rows of `dim` values. A chunk covers
// max(1, chunk_size / dim) rows; the last row may be partial.
std::vector<ChunkRange> row_chunks(std::uint64_t values, std::uint32_t dim,
                                   std::uint64_t chunk_size);

// Scratch directory that lives for one kernel run.
class SpillArea {
 public:
  explicit SpillArea(const std::filesystem::path& root);
  ~SpillArea();
  SpillArea(const SpillArea&) = delete;
  SpillArea& operator=(const SpillArea&) = delete;

  std::filesystem::path file(std::size_t chunk) const;

 private:
  std::filesystem::path dir_;
};

// Per-chunk intermediate outputs. With spilling enabled, put() writes the
// chunk to disk and drops it from memory; take() reads it back for the
// combination step.
template <typename T>
  requires std::is_trivially_copyable_v<T>
class ChunkStore {
 public:
  ChunkStore(std::size_t chunks, const KernelContext& ctx) : chunks_(chunks) {
    if (ctx.spill_intermediate) area_.emplace(ctx.spill_root);
  }

  void put(std::size_t i, std::vector<T> values) {
    if (!area_) {
      chunks_[i] = std::move(values);
      return;
    }
    const auto path = area_->file(i);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    const auto bytes = values.size() * sizeof(T);
    if (!out || !out.write(reinterpret_cast<const char*>(values.data()),
                           static_cast<std::streamsize>(bytes))) {
      throw IoError("spill write failed: " + path.string());
    }
    out.close();
    if (!out) throw IoError("spill write failed: " + path.string());
    sizes_.lock_and_set(i, values.size());
    written_.fetch_add(bytes, std::memory_order_relaxed);
  }

  std::vector<T> take(std::size_t i) {
    if (!area_) return std::move(chunks_[i]);
    const auto path = area_->file(i);
    std::vector<T> values(sizes_.get(i));
    std::ifstream in(path, std::ios::binary);
    const auto bytes = values.size() * sizeof(T);
    if (!in || !in.read(reinterpret_cast<char*>(values.data()),
                        static_cast<std::streamsize>(bytes))) {
      throw IoError("spill read failed: " + path.string());
    }
    read_.fetch_add(bytes, std::memory_order_relaxed);
    in.close();
    std::error_code ec;
    std::filesystem::remove(path, ec);
    return values;
  }

  std::uint64_t bytes_written() const noexcept { return written_.load(); }
  std::uint64_t bytes_read() const noexcept { return read_.load(); }

 private:
  struct Sizes {
    std::mutex mu;
    std::vector<std::size_t> n;
    void lock_and_set(std::size_t i, std::size_t v) {
      std::lock_guard lock(mu);
      if (n.size() <= i) n.resize(i + 1);
      n[i] = v;
    }
    std::size_t get(std::size_t i) {
      std::lock_guard lock(mu);
      return i < n.size() ? n[i] : 0;
    }
  };

  std::vector<std::vector<T>> chunks_;
  std::optional<SpillArea> area_;
  Sizes sizes_;
  std::atomic<std::uint64_t> written_{0};
  std::atomic<std::uint64_t> read_{0};
};

// Accumulates per-chunk tallies; combination order is chunk order.
struct ChunkTallies {
  explicit ChunkTallies(std::size_t chunks) : ops(chunks), work(chunks, 0) {}
  std::vector<OpCounters> ops;
  std::vector<std::uint64_t> work;

  OpCounters total_ops() const {
    OpCounters t;
    for (const auto& o : ops) t += o;
    return t;
  }
};

inline void finish_report(KernelReport& r, ChunkTallies&& tallies, const Stopwatch& watch,
                          const KernelParams& params, OpCounters combine_ops = {}) {
  r.soft_counters = tallies.total_ops();
  r.soft_counters += combine_ops;
  r.chunk_work_items = std::move(tallies.work);
  r.work_items = 0;
  for (auto w : r.chunk_work_items) r.work_items += w;
  r.parallelism = params.parallelism_degree;
  r.wall_time = watch.seconds();
}

// Output spec derived from the input: same seed, new kind and element count.
inline DataSpec derived_spec(const Dataset& input, DataKind kind, std::uint64_t size,
                             std::uint32_t dim = 1) {
  DataSpec s = input.spec;
  s.kind = kind;
  s.size = size;
  s.dim = dim;
  return s;
}

inline Dataset make_numeric(const Dataset& input, DataKind kind, std::uint32_t dim,
                            std::vector<double> values) {
  Dataset d;
  d.spec = derived_spec(input, kind, values.size(), dim);
  d.payload = NumericData{dim, std::move(values)};
  return d;
}

// Sortable 64-bit image of a double: orders like operator< on non-NaN
// values and separates -0.0 from +0.0.
inline std::uint64_t ordered_bits(double v) noexcept {
  const auto u = std::bit_cast<std::uint64_t>(v);
  return (u & 0x8000000000000000ULL) ? ~u : (u | 0x8000000000000000ULL);
}

inline double from_ordered_bits(std::uint64_t k) noexcept {
  const auto u = (k & 0x8000000000000000ULL) ? (k & 0x7fffffffffffffffULL) : ~k;
  return std::bit_cast<double>(u);
}

}  // namespace dwarfproxy::detail
