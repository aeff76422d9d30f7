#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace dwarfproxy {

// Half-open range of elements handled by one worker task.
struct ChunkRange {
  std::uint64_t begin = 0;
  std::uint64_t end = 0;
  std::uint64_t size() const noexcept { return end - begin; }
};

// Splits [0, total) into consecutive chunks of chunk_size (last one shorter).
inline std::vector<ChunkRange> make_chunks(std::uint64_t total, std::uint64_t chunk_size) {
  std::vector<ChunkRange> chunks;
  if (total == 0) return chunks;
  chunk_size = std::max<std::uint64_t>(chunk_size, 1);
  chunks.reserve((total + chunk_size - 1) / chunk_size);
  for (std::uint64_t b = 0; b < total; b += chunk_size) {
    chunks.push_back({b, std::min(total, b + chunk_size)});
  }
  return chunks;
}

// Runs fn(i) for i in [0, tasks) on a private pool of `workers` threads that
// pull task indices from a shared counter. The first exception thrown by any
// task is rethrown on the caller after all workers have joined.
template <typename Fn>
void parallel_for(std::uint64_t tasks, std::uint32_t workers, Fn&& fn) {
  if (tasks == 0) return;
  const auto pool_size =
      static_cast<std::uint32_t>(std::min<std::uint64_t>(std::max<std::uint32_t>(workers, 1), tasks));
  if (pool_size == 1) {
    for (std::uint64_t i = 0; i < tasks; ++i) fn(i);
    return;
  }

  std::atomic<std::uint64_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mu;

  auto body = [&] {
    for (;;) {
      if (failed.load(std::memory_order_relaxed)) return;
      const std::uint64_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= tasks) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
        failed.store(true, std::memory_order_relaxed);
      }
    }
  };

  {
    std::vector<std::jthread> pool;
    pool.reserve(pool_size - 1);
    for (std::uint32_t w = 1; w < pool_size; ++w) pool.emplace_back(body);
    body();
  }
  if (error) std::rethrow_exception(error);
}

inline std::uint32_t host_parallelism() noexcept {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1u : n;
}

}  // namespace dwarfproxy
