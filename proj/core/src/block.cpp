#include "bri/block.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "bri/error.hpp"

namespace bri {

Block::Block(std::size_t order, MemoryGauge* gauge)
    : order_(order), data_(order * order, 0.0), gauge_(gauge) {
  if (order == 0) throw DimensionMismatch(0, 1);
  attach();
}

Block::Block(std::size_t order, std::span<const double> row_major, MemoryGauge* gauge)
    : order_(order), data_(row_major.begin(), row_major.end()), gauge_(gauge) {
  if (order == 0 || row_major.size() != order * order)
    throw DimensionMismatch(row_major.size(), order * order);
  attach();
}

Block Block::identity(std::size_t order, MemoryGauge* gauge) {
  Block id(order, gauge);
  for (std::size_t i = 0; i < order; ++i) id(i, i) = 1.0;
  return id;
}

Block::Block(const Block& other) : order_(other.order_), data_(other.data_), gauge_(other.gauge_) {
  attach();
}

Block::Block(Block&& other) noexcept
    : order_(std::exchange(other.order_, 0)),
      data_(std::move(other.data_)),
      gauge_(std::exchange(other.gauge_, nullptr)) {
  other.data_.clear();
}

Block& Block::operator=(const Block& other) {
  if (this != &other) {
    Block copy(other);
    *this = std::move(copy);
  }
  return *this;
}

Block& Block::operator=(Block&& other) noexcept {
  if (this != &other) {
    detach();
    order_ = std::exchange(other.order_, 0);
    data_ = std::move(other.data_);
    other.data_.clear();
    gauge_ = std::exchange(other.gauge_, nullptr);
  }
  return *this;
}

Block::~Block() { detach(); }

void Block::attach() noexcept {
  if (gauge_) gauge_->acquire(bytes());
}

// A double release is a programming error; it terminates via noexcept.
void Block::detach() noexcept {
  if (gauge_) gauge_->release(bytes());
  gauge_ = nullptr;
}

double Block::max_abs() const noexcept {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

Block multiply(const Block& x, const Block& y, OpCounters* counters) {
  if (x.order() != y.order()) throw DimensionMismatch(x.order(), y.order());
  const std::size_t n = x.order();
  Block out(n, x.gauge());
  for (std::size_t i = 0; i < n; ++i) {
    double* out_row = out.row(i).data();
    const double* x_row = x.row(i).data();
    for (std::size_t p = 0; p < n; ++p) {
      const double a = x_row[p];
      if (a == 0.0) continue;
      const double* y_row = y.row(p).data();
      for (std::size_t j = 0; j < n; ++j) out_row[j] += a * y_row[j];
    }
  }
  if (counters) ++counters->block_multiplications;
  return out;
}

void subtract_in_place(Block& x, const Block& y, OpCounters* counters) {
  if (x.order() != y.order()) throw DimensionMismatch(x.order(), y.order());
  auto xs = x.data();
  auto ys = y.data();
  for (std::size_t i = 0; i < xs.size(); ++i) xs[i] -= ys[i];
  if (counters) ++counters->block_subtractions;
}

Block subtract(const Block& x, const Block& y, OpCounters* counters) {
  Block out(x);
  subtract_in_place(out, y, counters);
  return out;
}

LuFactors lu_factor(const Block& x) { return lu_factor(Block(x)); }

LuFactors lu_factor(Block&& x) {
  const std::size_t n = x.order();
  constexpr double eps = std::numeric_limits<double>::epsilon();

  std::vector<std::size_t> pivots(n);
  std::vector<double> row_scale(n);
  for (std::size_t i = 0; i < n; ++i) {
    pivots[i] = i;
    double s = 0.0;
    for (double v : x.row(i)) s = std::max(s, std::abs(v));
    row_scale[i] = s;
  }

  for (std::size_t j = 0; j < n; ++j) {
    std::size_t p = j;
    double best = std::abs(x(j, j));
    for (std::size_t i = j + 1; i < n; ++i) {
      const double v = std::abs(x(i, j));
      if (v > best) {
        best = v;
        p = i;
      }
    }
    if (p != j) {
      std::swap_ranges(x.row(j).begin(), x.row(j).end(), x.row(p).begin());
      std::swap(pivots[j], pivots[p]);
      std::swap(row_scale[j], row_scale[p]);
    }
    const double tol = static_cast<double>(n) * eps * row_scale[j];
    if (!(best > tol)) throw SingularBlock(j);

    const double inv_pivot = 1.0 / x(j, j);
    const double* pivot_row = x.row(j).data();
    for (std::size_t i = j + 1; i < n; ++i) {
      double* r = x.row(i).data();
      const double l = r[j] * inv_pivot;
      r[j] = l;
      if (l == 0.0) continue;
      for (std::size_t c = j + 1; c < n; ++c) r[c] -= l * pivot_row[c];
    }
  }
  return LuFactors{std::move(x), std::move(pivots)};
}

namespace {

// Solves (P A) X = P I row-wise: X = U^-1 L^-1 P.
Block inverse_from_factors(const LuFactors& lu) {
  const Block& f = lu.packed_lu;
  const std::size_t n = f.order();
  Block out(n, f.gauge());
  for (std::size_t i = 0; i < n; ++i) out(i, lu.pivots[i]) = 1.0;

  // forward substitution with unit lower L
  for (std::size_t i = 1; i < n; ++i) {
    double* oi = out.row(i).data();
    for (std::size_t p = 0; p < i; ++p) {
      const double l = f(i, p);
      if (l == 0.0) continue;
      const double* op = out.row(p).data();
      for (std::size_t c = 0; c < n; ++c) oi[c] -= l * op[c];
    }
  }
  // back substitution with U
  for (std::size_t ii = n; ii-- > 0;) {
    double* oi = out.row(ii).data();
    for (std::size_t p = ii + 1; p < n; ++p) {
      const double u = f(ii, p);
      if (u == 0.0) continue;
      const double* op = out.row(p).data();
      for (std::size_t c = 0; c < n; ++c) oi[c] -= u * op[c];
    }
    const double inv_diag = 1.0 / f(ii, ii);
    for (std::size_t c = 0; c < n; ++c) oi[c] *= inv_diag;
  }
  return out;
}

}  // namespace

Block invert_dense(const Block& x, OpCounters* counters) { return invert_dense(Block(x), counters); }

Block invert_dense(Block&& x, OpCounters* counters) {
  Block out = [&] {
    const LuFactors lu = lu_factor(std::move(x));
    return inverse_from_factors(lu);
  }();
  if (counters) ++counters->block_inversions;
  return out;
}

}  // namespace bri
