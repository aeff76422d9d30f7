#pragma once

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <type_traits>
#include <vector>

#include "dwarfproxy/error.hpp"

namespace dwarfproxy::detail {

static_assert(std::endian::native == std::endian::little,
              "container format is little-endian and written in native order");

template <typename T>
  requires std::is_trivially_copyable_v<T>
void put(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
  requires std::is_trivially_copyable_v<T>
void put_span(std::ostream& out, std::span<const T> values) {
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size_bytes()));
}

template <typename T>
  requires std::is_trivially_copyable_v<T>
T get(std::istream& in) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
    throw ParseError(0, "truncated container");
  }
  return value;
}

template <typename T>
  requires std::is_trivially_copyable_v<T>
std::vector<T> get_vector(std::istream& in, std::uint64_t count) {
  std::vector<T> values(count);
  if (count > 0 &&
      !in.read(reinterpret_cast<char*>(values.data()),
               static_cast<std::streamsize>(count * sizeof(T)))) {
    throw ParseError(0, "truncated container payload");
  }
  return values;
}

}  // namespace dwarfproxy::detail
