#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "bri/dense_matrix.hpp"
#include "bri/provider.hpp"

namespace bri {

/// Standard normal deviates from mt19937_64 via the Box-Muller transform.
///
/// Both pieces are fully specified, so a seed yields the same stream on every
/// platform (std::normal_distribution does not guarantee that).
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : engine_(seed) {}
  double next();

 private:
  double uniform_open();  // (0, 1]

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// i.i.d. N(0, 1) entries plus shift on the diagonal.
DenseMatrix random_normal_matrix(std::size_t m, std::uint64_t seed, double diagonal_shift = 0.0);

/// G G^T + I with G standard normal.
DenseMatrix random_spd_matrix(std::size_t m, std::uint64_t seed);

/// n standard normal input vectors of dimension d.
KernelSpec random_kernel_spec(std::size_t n, std::size_t d, double gamma, double sigma,
                              std::uint64_t seed);

}  // namespace bri
