#include <gtest/gtest.h>

#include <cstdint>

#include "bri/error.hpp"
#include "bri/instrumentation.hpp"

namespace bri {
namespace {

// Count the nodes of the complete 4-ary recursion tree of depth k-2 by walking it.
std::uint64_t count_tree_nodes(std::size_t frame_size) {
  if (frame_size == 2) return 1;
  return 1 + 4 * count_tree_nodes(frame_size - 1);
}

TEST(PredictedCounts, SmallCases) {
  EXPECT_EQ(predicted_counts(2), (OpCounters{2, 2, 1, 1}));
  EXPECT_EQ(predicted_counts(3), (OpCounters{6, 10, 5, 5}));
  EXPECT_EQ(predicted_counts(4), (OpCounters{22, 42, 21, 21}));
}

TEST(PredictedCounts, MatchesTreeWalk) {
  for (std::size_t k = 2; k <= 12; ++k) {
    const auto c = predicted_counts(k);
    EXPECT_EQ(c.schur_nodes, count_tree_nodes(k)) << "k=" << k;
    EXPECT_EQ(c.block_inversions, c.schur_nodes + 1);
    EXPECT_EQ(c.block_multiplications, 2 * c.schur_nodes);
  }
}

TEST(PredictedCounts, RejectsBadK) {
  EXPECT_THROW(predicted_counts(1), BadPartition);
  EXPECT_THROW(predicted_counts(0), BadPartition);
}

TEST(MemoryGauge, TracksPeak) {
  MemoryGauge g;
  g.acquire(8);
  g.acquire(8);
  g.release(8);
  g.acquire(8);
  EXPECT_EQ(g.live_blocks(), 2u);
  EXPECT_EQ(g.peak_blocks(), 2u);
  EXPECT_EQ(g.peak_bytes(), 16u);
  EXPECT_GE(g.peak_blocks(), g.live_blocks());
}

TEST(MemoryGauge, DoubleReleaseUnderflows) {
  MemoryGauge g;
  g.acquire(8);
  g.release(8);
  EXPECT_THROW(g.release(8), GaugeUnderflow);
  EXPECT_EQ(g.live_blocks(), 0u);
}

TEST(MemoryGauge, ScopeResetsBetweenRuns) {
  MemoryGauge g;
  const auto first = gauge_scope(g, [&] {
    for (int i = 0; i < 5; ++i) g.acquire(1);
    for (int i = 0; i < 5; ++i) g.release(1);
  });
  const auto second = gauge_scope(g, [&] {
    g.acquire(1);
    g.release(1);
  });
  EXPECT_EQ(first, 5u);
  EXPECT_EQ(second, 1u);
}

TEST(OpCounters, MergeIsAssociativeAndCommutative) {
  const OpCounters a{1, 2, 3, 4};
  const OpCounters b{10, 20, 30, 40};
  const OpCounters c{100, 200, 300, 400};
  EXPECT_EQ((a + b) + c, a + (b + c));
  EXPECT_EQ(a + b, b + a);
}

TEST(Stopwatch, Monotone) {
  Stopwatch w;
  const double t1 = w.elapsed_ms();
  const double t2 = w.elapsed_ms();
  EXPECT_GE(t1, 0.0);
  EXPECT_GE(t2, t1);
}

}  // namespace
}  // namespace bri
