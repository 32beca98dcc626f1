#include "bri/baseline_lu.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <string>

#include "bri/error.hpp"

namespace bri {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace

std::size_t lu_peak_bytes(std::size_t m) noexcept {
  return 3 * m * m * sizeof(double) + m * sizeof(double);
}

DenseMatrix lu_invert_full(const DenseMatrix& x, BenchRecord* record) {
  Stopwatch clock;
  const auto m = static_cast<Eigen::Index>(x.order());
  Eigen::Map<const RowMajor> input(x.data().data(), m, m);

  const Eigen::PartialPivLU<RowMajor> lu(input);
  const RowMajor& packed = lu.matrixLU();
  const double scale = input.cwiseAbs().maxCoeff();
  const double tol = static_cast<double>(m) * std::numeric_limits<double>::epsilon() * scale;
  for (Eigen::Index i = 0; i < m; ++i)
    if (!(std::abs(packed(i, i)) > tol))
      throw SingularMatrix("matrix is singular: pivot " + std::to_string(i) + " below threshold");

  DenseMatrix out(x.order());
  Eigen::Map<RowMajor>(out.data().data(), m, m) = lu.inverse();

  if (record) {
    record->method = Method::lu;
    record->m = x.order();
    record->k = 1;
    record->wall_ms = clock.elapsed_ms();
    record->peak_bytes = lu_peak_bytes(x.order());
    record->counters = OpCounters{};
    record->counters.block_inversions = 1;
  }
  return out;
}

DenseMatrix materialize(const BlockProvider& provider, const MaterializeOptions& options) {
  const BlockLayout& layout = provider.layout();
  const std::size_t n = options.trim ? layout.order() : layout.padded_order();
  if (n > options.max_order)
    throw Overflow("refusing to materialize order " + std::to_string(n) + " (limit " +
                   std::to_string(options.max_order) + ")");
  DenseMatrix out(n);
  const std::size_t b = layout.block_order();
  for (std::size_t alpha = 1; alpha <= layout.blocks(); ++alpha)
    for (std::size_t beta = 1; beta <= layout.blocks(); ++beta) {
      const std::size_t r0 = layout.offset(alpha);
      const std::size_t c0 = layout.offset(beta);
      if (r0 >= n || c0 >= n) continue;
      const Block block = provider.fetch(alpha, beta);
      for (std::size_t i = 0; i < b && r0 + i < n; ++i)
        for (std::size_t j = 0; j < b && c0 + j < n; ++j) out(r0 + i, c0 + j) = block(i, j);
    }
  return out;
}

}  // namespace bri
