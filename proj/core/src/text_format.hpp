#pragma once

#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "dwarfproxy/error.hpp"

namespace dwarfproxy::detail {

// Whitespace-separated tokens of one line with any `#` comment removed.
inline std::vector<std::string_view> tokenize(std::string_view line) {
  if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

// Calls fn(line_number, line) for every line of the document.
template <typename Fn>
void for_each_line(std::string_view doc, Fn&& fn) {
  std::size_t line_no = 0;
  while (!doc.empty()) {
    const auto nl = doc.find('\n');
    const auto line = doc.substr(0, nl);
    fn(++line_no, line);
    if (nl == std::string_view::npos) break;
    doc.remove_prefix(nl + 1);
  }
}

inline std::uint64_t parse_u64(std::string_view text, std::size_t line, std::string_view what) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw ParseError(line, std::string(what) + ": expected a non-negative integer, got '" +
                               std::string(text) + "'");
  }
  return v;
}

inline double parse_double(std::string_view text, std::size_t line, std::string_view what) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw ParseError(line, std::string(what) + ": expected a decimal number, got '" +
                               std::string(text) + "'");
  }
  return v;
}

// Shortest text that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

// Splits `key=value`; key is empty when there is no '='.
inline std::pair<std::string_view, std::string_view> split_key_value(std::string_view token) {
  const auto eq = token.find('=');
  if (eq == std::string_view::npos) return {{}, token};
  return {token.substr(0, eq), token.substr(eq + 1)};
}

}  // namespace dwarfproxy::detail
