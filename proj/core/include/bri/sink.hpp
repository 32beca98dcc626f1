#pragma once

#include <cstddef>
#include <mutex>
#include <vector>

#include "bri/block.hpp"
#include "bri/dense_matrix.hpp"
#include "bri/layout.hpp"

namespace bri {

/// Receives blocks (alpha, beta) of an inverse as they are produced.
/// Implementations serialize concurrent accept() calls.
class BlockSink {
 public:
  virtual ~BlockSink() = default;
  virtual void accept(std::size_t alpha, std::size_t beta, const Block& block) = 0;
  /// Called once after every block was delivered. Throws MissingBlocks if not.
  virtual void finalize() = 0;
  /// Called instead of finalize() when the producer fails part-way.
  virtual void abort() noexcept {}
};

/// Tracks which of the k^2 positions have arrived.
class BlockTally {
 public:
  explicit BlockTally(std::size_t k) : k_(k), seen_(k * k, false) {}
  /// Throws IndexOutOfRange.
  void mark(std::size_t alpha, std::size_t beta);
  std::size_t received() const noexcept { return received_; }
  std::size_t expected() const noexcept { return seen_.size(); }
  void require_complete() const;

 private:
  std::size_t k_;
  std::vector<bool> seen_;
  std::size_t received_ = 0;
};

/// Reassembles the inverse in memory, dropping padding rows and columns
/// unless `trim` is false.
class DenseAssemblySink final : public BlockSink {
 public:
  explicit DenseAssemblySink(const BlockLayout& layout, bool trim = true);
  void accept(std::size_t alpha, std::size_t beta, const Block& block) override;
  void finalize() override;

  const DenseMatrix& result() const noexcept { return result_; }
  DenseMatrix take() { return std::move(result_); }

 private:
  BlockLayout layout_;
  std::size_t limit_;
  DenseMatrix result_;
  BlockTally tally_;
  std::mutex mutex_;
};

}  // namespace bri
