#include "bri/sink.hpp"

#include <string>

#include "bri/error.hpp"

namespace bri {

void BlockTally::mark(std::size_t alpha, std::size_t beta) {
  if (alpha < 1 || alpha > k_ || beta < 1 || beta > k_)
    throw IndexOutOfRange("block (" + std::to_string(alpha) + ", " + std::to_string(beta) +
                          ") outside 1.." + std::to_string(k_));
  const std::size_t slot = (alpha - 1) * k_ + (beta - 1);
  if (!seen_[slot]) {
    seen_[slot] = true;
    ++received_;
  }
}

void BlockTally::require_complete() const {
  if (received_ != seen_.size()) throw MissingBlocks(received_, seen_.size());
}

DenseAssemblySink::DenseAssemblySink(const BlockLayout& layout, bool trim)
    : layout_(layout),
      limit_(trim ? layout.order() : layout.padded_order()),
      result_(limit_),
      tally_(layout.blocks()) {}

void DenseAssemblySink::accept(std::size_t alpha, std::size_t beta, const Block& block) {
  if (block.order() != layout_.block_order())
    throw DimensionMismatch(block.order(), layout_.block_order());
  std::lock_guard lock(mutex_);
  tally_.mark(alpha, beta);
  const std::size_t r0 = layout_.offset(alpha);
  const std::size_t c0 = layout_.offset(beta);
  for (std::size_t i = 0; i < block.order() && r0 + i < limit_; ++i)
    for (std::size_t j = 0; j < block.order() && c0 + j < limit_; ++j)
      result_(r0 + i, c0 + j) = block(i, j);
}

void DenseAssemblySink::finalize() {
  std::lock_guard lock(mutex_);
  tally_.require_complete();
}

}  // namespace bri
