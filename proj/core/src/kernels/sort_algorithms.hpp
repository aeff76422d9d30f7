#pragma once

#include <cstdint>
#include <queue>
#include <utility>
#include <vector>

namespace dwarfproxy::detail {

// Element moves performed by the sorts below; comparisons are counted by the
// caller's comparator.
struct SortTally {
  std::uint64_t moves = 0;
};

template <typename T, typename Less>
void insertion_sort(T* first, T* last, Less& less, SortTally& tally) {
  for (T* i = first + 1; i < last; ++i) {
    T v = std::move(*i);
    T* j = i;
    while (j > first && less(v, *(j - 1))) {
      *j = std::move(*(j - 1));
      --j;
      ++tally.moves;
    }
    *j = std::move(v);
    tally.moves += 2;
  }
}

// Hoare-partition quicksort with median-of-three pivots; recurses on the
// smaller side so stack depth stays logarithmic.
template <typename T, typename Less>
void quick_sort(T* first, T* last, Less& less, SortTally& tally) {
  constexpr std::ptrdiff_t kCutoff = 16;
  while (last - first > kCutoff) {
    T* mid = first + (last - first - 1) / 2;
    T* back = last - 1;
    if (less(*mid, *first)) std::swap(*mid, *first), tally.moves += 3;
    if (less(*back, *mid)) {
      std::swap(*back, *mid), tally.moves += 3;
      if (less(*mid, *first)) std::swap(*mid, *first), tally.moves += 3;
    }
    const T pivot = *mid;
    T* i = first - 1;
    T* j = last;
    for (;;) {
      do ++i; while (less(*i, pivot));
      do --j; while (less(pivot, *j));
      if (i >= j) break;
      std::swap(*i, *j);
      tally.moves += 3;
    }
    T* split = j + 1;
    if (split - first < last - split) {
      quick_sort(first, split, less, tally);
      first = split;
    } else {
      quick_sort(split, last, less, tally);
      last = split;
    }
  }
  if (last - first > 1) insertion_sort(first, last, less, tally);
}

template <typename T, typename Less>
void merge_sort_rec(T* first, T* last, T* buf, Less& less, SortTally& tally) {
  const std::ptrdiff_t n = last - first;
  if (n <= 16) {
    if (n > 1) insertion_sort(first, last, less, tally);
    return;
  }
  T* mid = first + n / 2;
  merge_sort_rec(first, mid, buf, less, tally);
  merge_sort_rec(mid, last, buf + n / 2, less, tally);
  if (!less(*mid, *(mid - 1))) return;  // already ordered
  T* a = first;
  T* b = mid;
  T* out = buf;
  while (a < mid && b < last) *out++ = less(*b, *a) ? std::move(*b++) : std::move(*a++);
  while (a < mid) *out++ = std::move(*a++);
  while (b < last) *out++ = std::move(*b++);
  std::move(buf, buf + n, first);
  tally.moves += 2 * static_cast<std::uint64_t>(n);
}

// Top-down stable merge sort with one auxiliary buffer.
template <typename T, typename Less>
void merge_sort(T* first, T* last, Less& less, SortTally& tally) {
  std::vector<T> buf(static_cast<std::size_t>(last - first));
  merge_sort_rec(first, last, buf.data(), less, tally);
}

// Merges sorted runs in order; on ties the lower-numbered run goes first.
template <typename T, typename Less, typename Emit>
void kway_merge(const std::vector<std::vector<T>>& runs, Less& less, Emit&& emit) {
  using Cursor = std::pair<std::size_t, std::size_t>;  // (run, position)
  auto greater = [&](const Cursor& x, const Cursor& y) {
    const T& a = runs[x.first][x.second];
    const T& b = runs[y.first][y.second];
    if (less(b, a)) return true;
    if (less(a, b)) return false;
    return x.first > y.first;
  };
  std::priority_queue<Cursor, std::vector<Cursor>, decltype(greater)> heap(greater);
  for (std::size_t r = 0; r < runs.size(); ++r) {
    if (!runs[r].empty()) heap.push({r, 0});
  }
  while (!heap.empty()) {
    auto [r, p] = heap.top();
    heap.pop();
    emit(runs[r][p]);
    if (p + 1 < runs[r].size()) heap.push({r, p + 1});
  }
}

}  // namespace dwarfproxy::detail
