#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mfa {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed file contents. `offset()` is the byte position where parsing failed.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// An argument outside the domain of the operation (bad sigma, mismatched sizes, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A numerical iteration produced non-finite or runaway values.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, int iteration)
      : Error(what), iteration_(iteration) {}

  /// 1-based iteration at which the failure was detected, 0 when unknown.
  int iteration() const noexcept { return iteration_; }

 private:
  int iteration_;
};

}  // namespace mfa
