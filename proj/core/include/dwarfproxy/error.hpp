#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dwarfproxy {

// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A value violates a documented precondition. field() names the offender.
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& message)
      : Error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// A kernel was handed a dataset of the wrong kind.
class InputKindError : public Error {
 public:
  using Error::Error;
};

// Malformed text or binary document. line() is 1-based, 0 when not applicable.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Unknown name requested from a fixed registry.
class LookupError : public Error {
 public:
  using Error::Error;
};

// A metric value is outside its admissible range.
class RangeError : public Error {
 public:
  RangeError(std::string metric, const std::string& message)
      : Error(metric + ": " + message), metric_(std::move(metric)) {}
  const std::string& metric() const noexcept { return metric_; }

 private:
  std::string metric_;
};

// Relative deviation would divide by a zero target value.
class DivisionHazardError : public Error {
 public:
  explicit DivisionHazardError(std::string metric)
      : Error("division hazard: target value of '" + metric + "' is zero"),
        metric_(std::move(metric)) {}
  const std::string& metric() const noexcept { return metric_; }

 private:
  std::string metric_;
};

// Disk spill or other I/O failure.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace dwarfproxy
