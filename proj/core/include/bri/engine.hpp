#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bri/block.hpp"
#include "bri/error.hpp"
#include "bri/instrumentation.hpp"
#include "bri/provider.hpp"
#include "bri/sink.hpp"

namespace bri {

/// Position in a 2 x 2 block matrix [[A, B], [C, D]]; also the label a
/// frame carries relative to its parent.
enum class Quadrant { A, B, C, D };

/// A <-> D, B <-> C. An internal node labelled q eliminates mirror(q).
constexpr Quadrant mirror(Quadrant q) noexcept {
  switch (q) {
    case Quadrant::A: return Quadrant::D;
    case Quadrant::B: return Quadrant::C;
    case Quadrant::C: return Quadrant::B;
    case Quadrant::D: return Quadrant::A;
  }
  return Quadrant::A;
}

char to_char(Quadrant q) noexcept;
inline constexpr Quadrant kQuadrants[] = {Quadrant::A, Quadrant::B, Quadrant::C, Quadrant::D};

/// Four values indexed by quadrant.
template <class T>
struct Quad {
  T a;
  T b;
  T c;
  T d;

  T& operator[](Quadrant q) noexcept { return q == Quadrant::A ? a : q == Quadrant::B ? b : q == Quadrant::C ? c : d; }
  const T& operator[](Quadrant q) const noexcept {
    return q == Quadrant::A ? a : q == Quadrant::B ? b : q == Quadrant::C ? c : d;
  }
};

/// A sub-block-matrix named by ordered block-row and block-column indices
/// (1-based). Never materialized.
///
/// rows[0]/cols[0] and rows.back()/cols.back() are the outer indices that
/// survive elimination; (rows[1], cols[1]) is the anchor pivot that every
/// leaf eliminates first.
struct Frame {
  std::vector<std::size_t> rows;
  std::vector<std::size_t> cols;
  Quadrant label = Quadrant::A;

  /// rows = cols = 1..k, label A.
  static Frame root(std::size_t k);
  std::size_t size() const noexcept { return rows.size(); }

  friend bool operator==(const Frame&, const Frame&) = default;
};

/// Drops one outer block row and column per child and swaps the two leading
/// indices back so the anchor stays at position 2:
///   A: rows r1..r(n-1),            cols c1..c(n-1)
///   B: rows r1..r(n-1),            cols c3, c2, c4..cn
///   C: rows r3, r2, r4..rn,        cols c1..c(n-1)
///   D: rows r3, r2, r4..rn,        cols c3, c2, c4..cn
/// Throws FrameTooSmall when the frame has fewer than 3 blocks per side.
Quad<Frame> split_frame(const Frame& frame);

/// Where in the recursion a pivot failed.
struct BranchPath {
  std::vector<Quadrant> labels;  // root excluded; empty means the root node
  std::size_t alpha = 1;         // target block of the run
  std::size_t beta = 1;
  std::size_t pivot_row = 0;     // block indices of the failed pivot, in the
  std::size_t pivot_col = 0;     // permuted view the run operates on
  bool at_leaf = false;

  std::size_t depth() const noexcept { return labels.size(); }
  std::string to_string() const;
};

class SingularPivot : public Error {
 public:
  explicit SingularPivot(BranchPath path);
  const BranchPath& path() const noexcept { return path_; }

 private:
  BranchPath path_;
};

/// Schur complement eliminating quadrant q of [[A, B], [C, D]]:
///   A: D - C A^-1 B    B: C - D B^-1 A    C: B - A C^-1 D    D: A - B D^-1 C
/// One inversion, two multiplications, one subtraction. Consumes `g`.
/// Throws DimensionMismatch or SingularPivot.
Block schur_eliminate(Quad<Block> g, Quadrant q, OpCounters* counters = nullptr);

/// Called with the label path, the frame and its reduced value after every
/// elimination node.
using NodeObserver =
    std::function<void(std::span<const Quadrant> path, const Frame& frame, const Block& value)>;

/// Per-run state: counters, gauge and an optional trace hook.
struct RunContext {
  OpCounters counters;
  MemoryGauge gauge;
  NodeObserver observer;

  // filled in by invert_block for error reports
  std::size_t alpha = 1;
  std::size_t beta = 1;
};

/// Reduces a frame to one block by nested Schur complements, depth first.
/// Leaves fetch their four blocks and eliminate the anchor; internal nodes
/// combine their children's values eliminating mirror(label). At every node
/// the pivot child is evaluated and inverted first, then folded with its
/// column partner, then its row partner, then subtracted from the kept
/// child, so each recursion level holds at most one partial result.
Block reduce_frame(const BlockProvider& provider, const Frame& frame, RunContext& context);

/// Block (alpha, beta) of the inverse of the provider's matrix.
///
/// When the provider is an augmentation with padding, the run goes over the
/// coupled matrix (see couple_padding) and padding entries of the result are
/// reset to their exact values, so the output is block (alpha, beta) of the
/// inverse of [[M, 0], [0, I]]. Without an explicit coupling one is matched
/// to the matrix with the default seed.
/// Throws IndexOutOfRange, SingularPivot, or SingularBlock for the final
/// inversion.
Block invert_block(const ProviderPtr& provider, std::size_t alpha, std::size_t beta,
                   RunContext& context, std::optional<PaddingCoupling> coupling = std::nullopt);

struct FullOptions {
  /// Concurrent block runs; each worker keeps one run's worth of buffers.
  std::size_t workers = 1;
  /// Seed of the matched coupling used when `coupling` is empty.
  std::uint64_t coupling_seed = kDefaultCouplingSeed;
  std::optional<PaddingCoupling> coupling;
};

struct InversionSummary {
  OpCounters counters;
  /// Max over runs when sequential; sum of per-worker peaks when concurrent.
  std::size_t peak_blocks = 0;
  std::size_t peak_bytes = 0;
  std::size_t blocks_written = 0;
  std::size_t workers = 1;
  double wall_ms = 0.0;
};

/// Runs invert_block for all k^2 positions in row-major order and hands each
/// result to the sink before computing the next. On failure the sink is
/// aborted and the error rethrown.
InversionSummary invert_full(const ProviderPtr& provider, BlockSink& sink,
                             const FullOptions& options = {});

}  // namespace bri
