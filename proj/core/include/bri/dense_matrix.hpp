#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace bri {

/// Unpartitioned m x m matrix of doubles, row-major.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  explicit DenseMatrix(std::size_t order) : order_(order), data_(order * order, 0.0) {}
  DenseMatrix(std::size_t order, std::vector<double> row_major);

  static DenseMatrix identity(std::size_t order);

  std::size_t order() const noexcept { return order_; }
  double& operator()(std::size_t row, std::size_t col) noexcept { return data_[row * order_ + col]; }
  double operator()(std::size_t row, std::size_t col) const noexcept {
    return data_[row * order_ + col];
  }
  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t order_ = 0;
  std::vector<double> data_;
};

/// Plain triple-loop product, for checks.
DenseMatrix operator*(const DenseMatrix& x, const DenseMatrix& y);

/// max_ij |x_ij - y_ij|
double max_abs_diff(const DenseMatrix& x, const DenseMatrix& y);
double max_abs(const DenseMatrix& x);

}  // namespace bri
