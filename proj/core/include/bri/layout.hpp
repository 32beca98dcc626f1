#pragma once

#include <cstddef>

namespace bri {

/// Partition geometry of an m x m matrix into k x k square blocks of order b.
///
/// When k does not divide m the matrix is padded by l < k rows and columns
/// so that m + l == k * b. Block indices are 1-based everywhere in the
/// library; element indices are 0-based.
class BlockLayout {
 public:
  /// Throws BadPartition if m == 0 or k < 2.
  static BlockLayout for_order(std::size_t m, std::size_t k);

  std::size_t order() const noexcept { return m_; }
  std::size_t blocks() const noexcept { return k_; }
  std::size_t block_order() const noexcept { return b_; }
  std::size_t padding() const noexcept { return l_; }
  std::size_t padded_order() const noexcept { return k_ * b_; }
  std::size_t bytes_per_block() const noexcept { return b_ * b_ * sizeof(double); }

  /// First element row/column of block index `index` (1-based).
  std::size_t offset(std::size_t index) const noexcept { return (index - 1) * b_; }
  bool contains(std::size_t index) const noexcept { return index >= 1 && index <= k_; }

  friend bool operator==(const BlockLayout&, const BlockLayout&) = default;

 private:
  BlockLayout(std::size_t m, std::size_t k, std::size_t b, std::size_t l)
      : m_(m), k_(k), b_(b), l_(l) {}

  std::size_t m_;
  std::size_t k_;
  std::size_t b_;
  std::size_t l_;
};

}  // namespace bri
