#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace elastoref {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Grid shapes or geometries that do not fit the operation.
class DimensionError : public Error {
public:
  using Error::Error;
};

/// A configuration value outside its admissible range.
class ParameterError : public Error {
public:
  using Error::Error;
};

/// Statistics that cannot be formed from the data (empty support, zero
/// variance in both ROIs, zero background mean, all-degenerate strain).
class DegenerateStatisticsError : public Error {
public:
  using Error::Error;
};

/// Malformed file contents. Carries the byte offset where decoding failed.
class FormatError : public Error {
public:
  FormatError(const std::string& what, std::uint64_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}

  std::uint64_t offset() const noexcept { return offset_; }

private:
  std::uint64_t offset_;
};

/// Filesystem failures; the message names the path.
class IoError : public Error {
public:
  using Error::Error;
};

}  // namespace elastoref
