#include "bri/instrumentation.hpp"

#include <algorithm>

#include "bri/error.hpp"

namespace bri {

OpCounters& OpCounters::operator+=(const OpCounters& other) noexcept {
  block_inversions += other.block_inversions;
  block_multiplications += other.block_multiplications;
  block_subtractions += other.block_subtractions;
  schur_nodes += other.schur_nodes;
  return *this;
}

OpCounters predicted_counts(std::size_t k) {
  if (k < 2) throw BadPartition("block count k must be at least 2, got " + std::to_string(k));
  if (k > 32) throw BadPartition("block count k too large for exact 64-bit counts");
  // sum_{d=0}^{k-2} 4^d
  std::uint64_t nodes = ((std::uint64_t{1} << (2 * (k - 1))) - 1) / 3;
  OpCounters c;
  c.schur_nodes = nodes;
  c.block_inversions = nodes + 1;
  c.block_multiplications = 2 * nodes;
  c.block_subtractions = nodes;
  return c;
}

void MemoryGauge::acquire(std::size_t bytes) noexcept {
  ++live_blocks_;
  live_bytes_ += bytes;
  peak_blocks_ = std::max(peak_blocks_, live_blocks_);
  peak_bytes_ = std::max(peak_bytes_, live_bytes_);
}

void MemoryGauge::release(std::size_t bytes) {
  if (live_blocks_ == 0 || live_bytes_ < bytes) throw GaugeUnderflow();
  --live_blocks_;
  live_bytes_ -= bytes;
}

void MemoryGauge::reset_peak() noexcept {
  peak_blocks_ = live_blocks_;
  peak_bytes_ = live_bytes_;
}

std::string to_string(Method method) { return method == Method::bri ? "bri" : "lu"; }

}  // namespace bri
