#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>

namespace bri {

/// Exact per-run operation counts at block granularity.
struct OpCounters {
  std::uint64_t block_inversions = 0;
  std::uint64_t block_multiplications = 0;
  std::uint64_t block_subtractions = 0;
  std::uint64_t schur_nodes = 0;

  OpCounters& operator+=(const OpCounters& other) noexcept;
  friend OpCounters operator+(OpCounters lhs, const OpCounters& rhs) noexcept { return lhs += rhs; }
  friend bool operator==(const OpCounters&, const OpCounters&) = default;
};

/// Closed-form counts for a single invert_block call on a k x k block matrix:
/// (4^(k-1) - 1) / 3 elimination nodes, one inversion per node plus the final
/// one, two multiplications per node. Throws BadPartition for k < 2.
OpCounters predicted_counts(std::size_t k);

/// Counts live block buffers and their bytes, with a high-water mark.
///
/// One gauge belongs to one run (one thread). Buffers register on creation
/// and release on destruction; see Block.
class MemoryGauge {
 public:
  void acquire(std::size_t bytes) noexcept;
  /// Throws GaugeUnderflow when nothing is registered.
  void release(std::size_t bytes);

  std::size_t live_blocks() const noexcept { return live_blocks_; }
  std::size_t peak_blocks() const noexcept { return peak_blocks_; }
  std::size_t live_bytes() const noexcept { return live_bytes_; }
  std::size_t peak_bytes() const noexcept { return peak_bytes_; }

  /// Restarts the high-water mark at the current live level.
  void reset_peak() noexcept;

 private:
  std::size_t live_blocks_ = 0;
  std::size_t peak_blocks_ = 0;
  std::size_t live_bytes_ = 0;
  std::size_t peak_bytes_ = 0;
};

/// Runs `run` with a fresh high-water mark and returns the peak block count
/// observed during it.
template <class Run>
std::size_t gauge_scope(MemoryGauge& gauge, Run&& run) {
  gauge.reset_peak();
  std::forward<Run>(run)();
  return gauge.peak_blocks();
}

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  void restart() { start_ = std::chrono::steady_clock::now(); }
  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

enum class Method { bri, lu };

std::string to_string(Method method);

/// One benchmark measurement; serialized as a CSV row by write_bench_csv.
struct BenchRecord {
  Method method = Method::bri;
  std::size_t m = 0;
  std::size_t k = 0;
  double wall_ms = 0.0;
  std::size_t peak_bytes = 0;
  OpCounters counters;
  std::uint64_t seed = 0;
};

}  // namespace bri
