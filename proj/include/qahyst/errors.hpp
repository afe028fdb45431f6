#pragma once

#include <stdexcept>
#include <string>

namespace qahyst {

/// Input violates a documented precondition or domain invariant.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed text input; carries the offending line number when known.
class ParseError : public ValidationError {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : ValidationError(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Query outside the domain of a function (time outside a waveform, r beyond the lattice).
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Least-squares fit could not be formed.
class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Filesystem failure while reading or writing artifacts.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qahyst
