#include "bri/layout.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "bri/dense_matrix.hpp"
#include "bri/error.hpp"

namespace bri {

BlockLayout BlockLayout::for_order(std::size_t m, std::size_t k) {
  if (m == 0) throw BadPartition("matrix order must be positive");
  if (k < 2) throw BadPartition("block count k must be at least 2, got " + std::to_string(k));
  const std::size_t l = (k - m % k) % k;
  const std::size_t b = (m + l) / k;
  // m + l is a positive multiple of k, so k <= m + l always holds here.
  return BlockLayout(m, k, b, l);
}

DenseMatrix::DenseMatrix(std::size_t order, std::vector<double> row_major)
    : order_(order), data_(std::move(row_major)) {
  if (data_.size() != order * order)
    throw DimensionMismatch(data_.size(), order * order);
}

DenseMatrix DenseMatrix::identity(std::size_t order) {
  DenseMatrix id(order);
  for (std::size_t i = 0; i < order; ++i) id(i, i) = 1.0;
  return id;
}

DenseMatrix operator*(const DenseMatrix& x, const DenseMatrix& y) {
  if (x.order() != y.order()) throw DimensionMismatch(x.order(), y.order());
  const std::size_t n = x.order();
  DenseMatrix out(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t p = 0; p < n; ++p) {
      const double a = x(i, p);
      for (std::size_t j = 0; j < n; ++j) out(i, j) += a * y(p, j);
    }
  return out;
}

double max_abs_diff(const DenseMatrix& x, const DenseMatrix& y) {
  if (x.order() != y.order()) throw DimensionMismatch(x.order(), y.order());
  double m = 0.0;
  auto xs = x.data();
  auto ys = y.data();
  for (std::size_t i = 0; i < xs.size(); ++i) m = std::max(m, std::abs(xs[i] - ys[i]));
  return m;
}

double max_abs(const DenseMatrix& x) {
  double m = 0.0;
  for (double v : x.data()) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace bri
