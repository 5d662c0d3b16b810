#pragma once

#include <stdexcept>
#include <string>

namespace bnps {

// Argument outside the mathematical domain of an operation (poles, alpha
// outside (0,1), non-positive theta, ...).
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

// The exact Pitman-Yor path refuses sketches whose total count exceeds the
// configured cap; callers are expected to fall back to Monte Carlo.
class ExactCapExceeded : public DomainError {
public:
  explicit ExactCapExceeded(const std::string& what) : DomainError(what) {}
};

// Two sketches built with different hash parameters cannot be combined.
class IncompatibleSketch : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Unreadable or malformed user data (input files, configs).
class DataError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class SketchFormatError : public DataError {
public:
  enum class Kind { bad_magic, bad_version, truncated, checksum_mismatch, bad_width, inconsistent_total };

  SketchFormatError(Kind kind, const std::string& what) : DataError(what), kind_(kind) {}

  [[nodiscard]] Kind kind() const noexcept { return kind_; }

private:
  Kind kind_;
};

} // namespace bnps
