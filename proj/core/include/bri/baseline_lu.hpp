#pragma once

#include <cstddef>

#include "bri/dense_matrix.hpp"
#include "bri/instrumentation.hpp"
#include "bri/provider.hpp"

namespace bri {

/// Whole-matrix inverse by LU with partial pivoting (row interchanges).
/// Throws SingularMatrix. When `record` is given, fills method, m, wall_ms
/// and peak_bytes (input + factorization workspace + output + pivots).
DenseMatrix lu_invert_full(const DenseMatrix& x, BenchRecord* record = nullptr);

/// Resident bytes charged to one lu_invert_full call of order m.
std::size_t lu_peak_bytes(std::size_t m) noexcept;

struct MaterializeOptions {
  bool trim = true;
  std::size_t max_order = 8192;
};

/// Gathers every block of the provider into one dense matrix, dropping the
/// padding when `trim` is set. Throws Overflow if the order would exceed
/// max_order.
DenseMatrix materialize(const BlockProvider& provider, const MaterializeOptions& options = {});

}  // namespace bri
