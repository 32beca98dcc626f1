#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bri/instrumentation.hpp"

namespace bri {

/// Dense square b x b block of doubles, row-major.
///
/// A block optionally reports to a MemoryGauge: it registers one buffer when
/// constructed or copied and releases it when destroyed. Moves transfer the
/// registration. Results of block operations inherit the gauge of their
/// left operand.
class Block {
 public:
  /// Zero-filled block of the given order (>= 1).
  explicit Block(std::size_t order, MemoryGauge* gauge = nullptr);
  Block(std::size_t order, std::span<const double> row_major, MemoryGauge* gauge = nullptr);

  static Block identity(std::size_t order, MemoryGauge* gauge = nullptr);
  static Block zero(std::size_t order, MemoryGauge* gauge = nullptr) { return Block(order, gauge); }

  Block(const Block& other);
  Block(Block&& other) noexcept;
  Block& operator=(const Block& other);
  Block& operator=(Block&& other) noexcept;
  ~Block();

  std::size_t order() const noexcept { return order_; }
  std::size_t bytes() const noexcept { return data_.size() * sizeof(double); }

  double& operator()(std::size_t row, std::size_t col) noexcept { return data_[row * order_ + col]; }
  double operator()(std::size_t row, std::size_t col) const noexcept {
    return data_[row * order_ + col];
  }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * order_, order_}; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * order_, order_};
  }

  MemoryGauge* gauge() const noexcept { return gauge_; }

  /// Largest absolute entry.
  double max_abs() const noexcept;

 private:
  void attach() noexcept;
  void detach() noexcept;

  std::size_t order_ = 0;
  std::vector<double> data_;
  MemoryGauge* gauge_ = nullptr;
};

/// Packed partial-pivoting LU factors: P * A = L * U with unit-diagonal L
/// stored below the diagonal and U on and above it. pivots[i] is the
/// zero-based row of A that ends up as row i of P * A.
struct LuFactors {
  Block packed_lu;
  std::vector<std::size_t> pivots;

  std::size_t order() const noexcept { return packed_lu.order(); }
};

/// x * y. Counts one multiplication.
Block multiply(const Block& x, const Block& y, OpCounters* counters = nullptr);

/// x - y into a new buffer. Counts one subtraction.
Block subtract(const Block& x, const Block& y, OpCounters* counters = nullptr);
/// x -= y without allocating. Counts one subtraction.
void subtract_in_place(Block& x, const Block& y, OpCounters* counters = nullptr);

/// Partial-pivoting LU. A pivot is rejected as singular when
/// |pivot| <= b * eps * max|row of the input that supplied it|.
/// Throws SingularBlock.
LuFactors lu_factor(const Block& x);
LuFactors lu_factor(Block&& x);

/// Inverse of x via lu_factor and triangular solves. Counts one inversion.
/// The rvalue overload factors in place, so at most two buffers are live.
Block invert_dense(const Block& x, OpCounters* counters = nullptr);
Block invert_dense(Block&& x, OpCounters* counters = nullptr);

}  // namespace bri
