#include "bri/random.hpp"

#include <cmath>
#include <numbers>

namespace bri {

double NormalStream::uniform_open() {
  // 53 random bits -> (0, 1]
  return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
}

double NormalStream::next() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double radius = std::sqrt(-2.0 * std::log(uniform_open()));
  const double angle = 2.0 * std::numbers::pi * uniform_open();
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

DenseMatrix random_normal_matrix(std::size_t m, std::uint64_t seed, double diagonal_shift) {
  NormalStream normal(seed);
  DenseMatrix out(m);
  for (double& v : out.data()) v = normal.next();
  for (std::size_t i = 0; i < m; ++i) out(i, i) += diagonal_shift;
  return out;
}

DenseMatrix random_spd_matrix(std::size_t m, std::uint64_t seed) {
  const DenseMatrix g = random_normal_matrix(m, seed);
  DenseMatrix out(m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      double s = 0.0;
      for (std::size_t t = 0; t < m; ++t) s += g(i, t) * g(j, t);
      out(i, j) = s;
      out(j, i) = s;
    }
  for (std::size_t i = 0; i < m; ++i) out(i, i) += 1.0;
  return out;
}

KernelSpec random_kernel_spec(std::size_t n, std::size_t d, double gamma, double sigma,
                              std::uint64_t seed) {
  NormalStream normal(seed);
  KernelSpec spec;
  spec.gamma = gamma;
  spec.sigma = sigma;
  spec.inputs.assign(n, std::vector<double>(d));
  for (auto& x : spec.inputs)
    for (double& v : x) v = normal.next();
  return spec;
}

}  // namespace bri
