#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace bri {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  DimensionMismatch(std::size_t lhs, std::size_t rhs);
};

/// A pivot of a block LU factorization fell below the singularity threshold.
class SingularBlock : public Error {
 public:
  explicit SingularBlock(std::size_t pivot_index);
  /// Zero-based row of the failing pivot.
  std::size_t pivot_index() const noexcept { return pivot_index_; }

 private:
  std::size_t pivot_index_;
};

/// The whole-matrix baseline found the input singular.
class SingularMatrix : public Error {
 public:
  using Error::Error;
};

class IndexOutOfRange : public Error {
 public:
  using Error::Error;
};

class BadPartition : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  IoError(const std::string& what, std::uint64_t byte_offset);
  explicit IoError(const std::string& what);
  std::uint64_t byte_offset() const noexcept { return byte_offset_; }

 private:
  std::uint64_t byte_offset_ = 0;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class FrameTooSmall : public Error {
 public:
  using Error::Error;
};

class MissingBlocks : public Error {
 public:
  MissingBlocks(std::size_t received, std::size_t expected);
  std::size_t received() const noexcept { return received_; }
  std::size_t expected() const noexcept { return expected_; }

 private:
  std::size_t received_;
  std::size_t expected_;
};

/// A buffer was released more often than it was registered.
class GaugeUnderflow : public Error {
 public:
  GaugeUnderflow();
};

/// Materializing would exceed the configured order ceiling.
class Overflow : public Error {
 public:
  using Error::Error;
};

}  // namespace bri
