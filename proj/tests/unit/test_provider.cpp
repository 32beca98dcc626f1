#include <gtest/gtest.h>

#include <fcntl.h>
#include <unistd.h>

#include <atomic>
#include <cmath>
#include <cstring>
#include <fstream>
#include <thread>

#include "bri/baseline_lu.hpp"
#include "bri/brim.hpp"
#include "bri/error.hpp"
#include "bri/provider.hpp"
#include "bri/random.hpp"
#include "support/oracle.hpp"

namespace bri {
namespace {

using testing::block_of;
using testing::from_eigen;
using testing::Mat;
using testing::oracle_inverse;
using testing::random_shifted;
using testing::TempDir;
using testing::to_eigen;

bool bit_identical(const Block& x, const Block& y) {
  return x.order() == y.order() &&
         std::memcmp(x.data().data(), y.data().data(), x.bytes()) == 0;
}

TEST(BlockLayout, Geometry) {
  const auto a = BlockLayout::for_order(4, 2);
  EXPECT_EQ(a.block_order(), 2u);
  EXPECT_EQ(a.padding(), 0u);
  const auto b = BlockLayout::for_order(10, 4);
  EXPECT_EQ(b.block_order(), 3u);
  EXPECT_EQ(b.padding(), 2u);
  const auto c = BlockLayout::for_order(3, 2);
  EXPECT_EQ(c.block_order(), 2u);
  EXPECT_EQ(c.padding(), 1u);
}

TEST(BlockLayout, InvariantsHoldOverRange) {
  for (std::size_t m = 1; m <= 40; ++m)
    for (std::size_t k = 2; k <= 12; ++k) {
      const auto lay = BlockLayout::for_order(m, k);
      EXPECT_GE(lay.block_order(), 1u);
      EXPECT_LT(lay.padding(), k);
      EXPECT_EQ(m + lay.padding(), k * lay.block_order());
    }
}

TEST(BlockLayout, BadPartition) {
  EXPECT_THROW(BlockLayout::for_order(4, 1), BadPartition);
  EXPECT_THROW(BlockLayout::for_order(0, 2), BadPartition);
  EXPECT_THROW(make_memory_provider(DenseMatrix::identity(4), 1), BadPartition);
}

TEST(MemoryProvider, IdentityOffDiagonalIsZero) {
  const auto p = make_memory_provider(DenseMatrix::identity(4), 2);
  const Block off = p->fetch(1, 2);
  EXPECT_EQ(off.max_abs(), 0.0);
  const Block diag = p->fetch(2, 2);
  EXPECT_EQ(diag(0, 0), 1.0);
  EXPECT_EQ(diag(1, 1), 1.0);
}

TEST(MemoryProvider, IndexOutOfRange) {
  const auto p = make_memory_provider(DenseMatrix::identity(4), 2);
  EXPECT_THROW(p->fetch(0, 1), IndexOutOfRange);
  EXPECT_THROW(p->fetch(1, 3), IndexOutOfRange);
}

TEST(MemoryProvider, FetchAllocatesOneBuffer) {
  MemoryGauge gauge;
  const auto p = make_memory_provider(from_eigen(random_shifted(6, 1, 6)), 3);
  const auto peak = gauge_scope(gauge, [&] { const Block b = p->fetch(2, 3, &gauge); });
  EXPECT_EQ(peak, 1u);
  EXPECT_EQ(gauge.live_blocks(), 0u);
}

TEST(FileProvider, MatchesMemoryProviderBitForBit) {
  TempDir dir;
  const DenseMatrix m = from_eigen(random_shifted(9, 3, 9));
  write_matrix(dir / "m.brim", m);
  for (std::size_t k : {2u, 3u, 4u}) {
    const auto mem = make_memory_provider(m, k);
    const auto file = make_file_provider(dir / "m.brim", k);
    EXPECT_EQ(file->layout(), mem->layout());
    for (std::size_t a = 1; a <= k; ++a)
      for (std::size_t b = 1; b <= k; ++b) EXPECT_TRUE(bit_identical(file->fetch(a, b), mem->fetch(a, b)));
  }
}

TEST(FileProvider, IdentityRoundTrip) {
  TempDir dir;
  write_matrix(dir / "i4.brim", DenseMatrix::identity(4));
  const auto p = make_file_provider(dir / "i4.brim", 2);
  const Block b = p->fetch(2, 2);
  EXPECT_EQ(b(0, 0), 1.0);
  EXPECT_EQ(b(0, 1), 0.0);
  EXPECT_EQ(b(1, 0), 0.0);
  EXPECT_EQ(b(1, 1), 1.0);
}

TEST(FileProvider, TruncatedFileIsFormatError) {
  TempDir dir;
  write_matrix(dir / "t.brim", DenseMatrix::identity(4));
  std::filesystem::resize_file(dir / "t.brim", 24 + 8 * 15);
  EXPECT_THROW(make_file_provider(dir / "t.brim", 2), FormatError);
}

TEST(FileProvider, MissingFileIsIoError) {
  TempDir dir;
  EXPECT_THROW(make_file_provider(dir / "nope.brim", 2), IoError);
}

// A sparse 1 GiB BRIM file: fetching one block keeps only that block resident.
TEST(FileProvider, HugeFileSingleBlockStaysSmall) {
  TempDir dir;
  const std::uint64_t m = 11586;  // 24 + 8 m^2 > 1 GiB
  BrimHeader header;
  header.order = m;
  {
    std::ofstream out(dir / "big.brim", std::ios::binary);
    const auto head = encode_header(header);
    out.write(reinterpret_cast<const char*>(head.data()), head.size());
  }
  std::filesystem::resize_file(dir / "big.brim", header.file_bytes());
  ASSERT_GT(header.file_bytes(), std::uint64_t{1} << 30);

  const auto p = make_file_provider(dir / "big.brim", 6);
  const std::size_t b = p->layout().block_order();
  MemoryGauge gauge;
  gauge_scope(gauge, [&] {
    const Block block = p->fetch(3, 5, &gauge);
    EXPECT_EQ(block.max_abs(), 0.0);
  });
  EXPECT_LE(gauge.peak_bytes(), 2 * b * b * sizeof(double));
}

TEST(FileProvider, ConcurrentFetchesAgree) {
  TempDir dir;
  const DenseMatrix m = from_eigen(random_shifted(12, 4, 12));
  write_matrix(dir / "m.brim", m);
  const auto p = make_file_provider(dir / "m.brim", 4);
  const Block expected = p->fetch(3, 2);
  std::vector<std::thread> threads;
  std::atomic<int> mismatches{0};
  for (int t = 0; t < 4; ++t)
    threads.emplace_back([&] {
      for (int i = 0; i < 50; ++i)
        if (!bit_identical(p->fetch(3, 2), expected)) ++mismatches;
    });
  for (auto& t : threads) t.join();
  EXPECT_EQ(mismatches.load(), 0);
}

KernelSpec three_points(double gamma, double sigma) {
  KernelSpec spec;
  spec.gamma = gamma;
  spec.sigma = sigma;
  spec.inputs = {{0.0, 0.0}, {0.3, -0.4}, {1.0, 0.5}};
  return spec;
}

TEST(KernelProvider, BorderedCorner) {
  const double gamma = 0.5;
  const auto p = make_kernel_provider(three_points(gamma, 1.0), 2);
  ASSERT_EQ(p->layout().block_order(), 2u);
  const Block corner = p->fetch(1, 1);
  EXPECT_EQ(corner(0, 0), 0.0);
  EXPECT_EQ(corner(0, 1), 1.0);
  EXPECT_EQ(corner(1, 0), 1.0);
  EXPECT_DOUBLE_EQ(corner(1, 1), 1.0 + 1.0 / gamma);
}

TEST(KernelProvider, ElementFormula) {
  const KernelSource src(three_points(2.0, 0.7));
  // |x1 - x2|^2 = 0.09 + 0.16 = 0.25
  EXPECT_DOUBLE_EQ(src.element(1, 2), std::exp(-0.25 / (2 * 0.49)));
  EXPECT_DOUBLE_EQ(src.element(3, 3), 1.5);
  for (std::size_t j = 1; j <= 3; ++j) {
    EXPECT_EQ(src.element(0, j), 1.0);
    EXPECT_EQ(src.element(j, 0), 1.0);
  }
}

TEST(KernelProvider, WideBandwidthLimit) {
  const KernelSource src(three_points(1.0, 1e8));
  EXPECT_NEAR(src.element(1, 2), 1.0, 1e-12);
  EXPECT_NEAR(src.element(2, 3), 1.0, 1e-12);
}

TEST(KernelProvider, RejectsBadSpec) {
  EXPECT_THROW(make_kernel_provider(three_points(0.0, 1.0), 2), BadPartition);
  EXPECT_THROW(make_kernel_provider(three_points(1.0, -1.0), 2), BadPartition);
  KernelSpec ragged = three_points(1.0, 1.0);
  ragged.inputs[1].push_back(2.0);
  EXPECT_THROW(make_kernel_provider(ragged, 2), BadPartition);
  EXPECT_THROW(make_kernel_provider(KernelSpec{}, 2), BadPartition);
}

TEST(KernelProvider, SymmetricAndDiagonallyDominantInterior) {
  for (double gamma : {0.25, 0.5, 1.0}) {
    const auto p = make_kernel_provider(random_kernel_spec(20, 3, gamma, 1.0, 9), 3);
    const DenseMatrix a = materialize(*p);
    for (std::size_t i = 0; i < a.order(); ++i)
      for (std::size_t j = 0; j < a.order(); ++j) EXPECT_EQ(a(i, j), a(j, i));
    for (std::size_t i = 1; i < a.order(); ++i)
      for (std::size_t j = 1; j < a.order(); ++j)
        if (i != j) {
          EXPECT_GT(a(i, i), std::abs(a(i, j)));
        }
  }
}

TEST(Providers, RepeatedFetchesAreBitIdentical) {
  TempDir dir;
  const DenseMatrix m = from_eigen(random_shifted(7, 8, 7));
  write_matrix(dir / "m.brim", m);
  const std::vector<ProviderPtr> providers = {
      make_memory_provider(m, 3), make_file_provider(dir / "m.brim", 3),
      make_kernel_provider(random_kernel_spec(6, 2, 1.0, 1.0, 2), 3),
      permute_provider(make_memory_provider(m, 3), 2, 3),
      couple_padding(make_memory_provider(m, 3)),
      cache_provider(make_memory_provider(m, 3), 2)};
  for (const auto& p : providers)
    for (std::size_t a = 1; a <= 3; ++a)
      for (std::size_t b = 1; b <= 3; ++b) EXPECT_TRUE(bit_identical(p->fetch(a, b), p->fetch(a, b)));
}

TEST(PermuteProvider, IdentityView) {
  const auto base = make_memory_provider(from_eigen(random_shifted(6, 5, 6)), 3);
  EXPECT_EQ(permute_provider(base, 1, 1), base);
}

TEST(PermuteProvider, TwoByTwoSwap) {
  const auto base = make_memory_provider(DenseMatrix(2, {4, 2, 1, 3}), 2);
  const DenseMatrix view = materialize(*permute_provider(base, 2, 2));
  EXPECT_EQ(view, DenseMatrix(2, {3, 1, 2, 4}));
}

TEST(PermuteProvider, SwapsBlockRowBetaAndColumnAlpha) {
  const DenseMatrix m = from_eigen(random_shifted(8, 6, 0));
  const auto base = make_memory_provider(m, 4);
  const DenseMatrix view = materialize(*permute_provider(base, 3, 2));
  auto swap_first = [](std::size_t block, std::size_t target) {
    return block == 0 ? target - 1 : block == target - 1 ? 0 : block;
  };
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 8; ++j) {
      const std::size_t bi = swap_first(i / 2, 2) * 2 + i % 2;
      const std::size_t bj = swap_first(j / 2, 3) * 2 + j % 2;
      EXPECT_EQ(view(i, j), m(bi, bj));
    }
}

TEST(PermuteProvider, Involution) {
  const DenseMatrix m = from_eigen(random_shifted(8, 7, 0));
  const auto base = make_memory_provider(m, 4);
  for (std::size_t a = 1; a <= 4; ++a)
    for (std::size_t b = 1; b <= 4; ++b)
      EXPECT_EQ(materialize(*permute_provider(permute_provider(base, a, b), a, b)), m);
}

TEST(PermuteProvider, OutOfRange) {
  const auto base = make_memory_provider(DenseMatrix::identity(4), 2);
  EXPECT_THROW(permute_provider(base, 3, 1), IndexOutOfRange);
  EXPECT_THROW(permute_provider(base, 1, 0), IndexOutOfRange);
}

// The (1,1) block of the permuted view's inverse is N_{alpha beta}.
TEST(PermuteProvider, TopLeftInverseBlockIsTarget) {
  for (std::size_t m : {4u, 9u, 16u})
    for (std::size_t k : {2u, 3u, 4u}) {
      if (m % k != 0) continue;
      const std::size_t b = m / k;
      const Mat dense = random_shifted(m, static_cast<unsigned>(m * 10 + k), static_cast<double>(m));
      const Mat inverse = oracle_inverse(dense);
      const auto base = make_memory_provider(from_eigen(dense), k);
      for (std::size_t a = 1; a <= k; ++a)
        for (std::size_t be = 1; be <= k; ++be) {
          const Mat view = to_eigen(materialize(*permute_provider(base, a, be)));
          const Mat top_left = block_of(oracle_inverse(view), 1, 1, b);
          EXPECT_LE((top_left - block_of(inverse, a, be, b)).cwiseAbs().maxCoeff(), 1e-9)
              << "m=" << m << " k=" << k << " alpha=" << a << " beta=" << be;
        }
    }
}

TEST(AugmentProvider, NoPaddingMatchesSource) {
  const DenseMatrix m = from_eigen(random_shifted(6, 11, 0));
  auto src = std::make_shared<MemorySource>(m);
  const auto p = augment_provider(src, BlockLayout::for_order(6, 3));
  for (std::size_t a = 1; a <= 3; ++a)
    for (std::size_t b = 1; b <= 3; ++b) {
      const Block blk = p->fetch(a, b);
      for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) EXPECT_EQ(blk(i, j), m((a - 1) * 2 + i, (b - 1) * 2 + j));
    }
}

TEST(AugmentProvider, PaddedCornerBlock) {
  const DenseMatrix m(3, {1, 2, 3, 4, 5, 6, 7, 8, 9});
  const auto p = make_memory_provider(m, 2);
  ASSERT_EQ(p->layout().padding(), 1u);
  const Block corner = p->fetch(2, 2);
  EXPECT_EQ(corner(0, 0), 9.0);
  EXPECT_EQ(corner(0, 1), 0.0);
  EXPECT_EQ(corner(1, 0), 0.0);
  EXPECT_EQ(corner(1, 1), 1.0);
  const Block right = p->fetch(1, 2);
  EXPECT_EQ(right(0, 0), 3.0);
  EXPECT_EQ(right(1, 0), 6.0);
  EXPECT_EQ(right(0, 1), 0.0);
  EXPECT_EQ(right(1, 1), 0.0);
}

TEST(AugmentProvider, MismatchedLayout) {
  auto src = std::make_shared<MemorySource>(DenseMatrix::identity(5));
  EXPECT_THROW(augment_provider(src, BlockLayout::for_order(6, 2)), BadPartition);
}

// Gamma^-1 = [[M^-1, 0], [0, I]]
TEST(AugmentProvider, InverseTopLeftIsOriginalInverse) {
  for (std::size_t m = 5; m <= 24; m += 3)
    for (std::size_t k : {3u, 4u, 5u}) {
      const auto lay = BlockLayout::for_order(m, k);
      if (lay.padding() == 0) continue;
      const Mat dense = random_shifted(m, static_cast<unsigned>(m + 100 * k), static_cast<double>(m));
      const auto p = make_memory_provider(from_eigen(dense), k);
      const Mat gamma = to_eigen(materialize(*p, {.trim = false}));
      ASSERT_EQ(static_cast<std::size_t>(gamma.rows()), lay.padded_order());
      const Mat inv = oracle_inverse(gamma);
      const auto mi = static_cast<Eigen::Index>(m);
      EXPECT_LE((inv.topLeftCorner(mi, mi) - oracle_inverse(dense)).cwiseAbs().maxCoeff(), 1e-9);
      EXPECT_LE(inv.topRightCorner(mi, gamma.cols() - mi).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(CouplePadding, InverseTopLeftIsOriginalInverse) {
  for (std::size_t m : {6u, 10u, 13u})
    for (std::size_t k : {4u, 5u}) {
      const Mat dense = random_shifted(m, static_cast<unsigned>(m * k), static_cast<double>(m));
      const auto p = couple_padding(make_memory_provider(from_eigen(dense), k));
      const Mat coupled = to_eigen(materialize(*p, {.trim = false}));
      const auto mi = static_cast<Eigen::Index>(m);
      const Mat inv = oracle_inverse(coupled);
      EXPECT_LE((inv.topLeftCorner(mi, mi) - oracle_inverse(dense)).cwiseAbs().maxCoeff(), 1e-9);
      // the padding couples to the data, so no zero border
      EXPECT_GT(inv.topRightCorner(mi, coupled.cols() - mi).cwiseAbs().minCoeff(), 0.0);
    }
}

TEST(CouplePadding, ScaledCornerKeepsInverse) {
  const Mat dense = random_shifted(10, 5, 10);
  PaddingCoupling coupling;
  coupling.scale = 0.7;
  coupling.diagonal = 9.0;
  const auto p = couple_padding(make_memory_provider(from_eigen(dense), 4), coupling);
  const Mat coupled = to_eigen(materialize(*p, {.trim = false}));
  EXPECT_EQ(coupled(10, 10), 9.0);
  EXPECT_EQ(coupled(11, 10), 0.0);
  EXPECT_LE(coupled.topRightCorner(10, 2).cwiseAbs().maxCoeff(), 0.7);
  EXPECT_LE((oracle_inverse(coupled).topLeftCorner(10, 10) - oracle_inverse(dense)).cwiseAbs().maxCoeff(), 1e-12);
  coupling.diagonal = 0.0;
  EXPECT_THROW(couple_padding(make_memory_provider(from_eigen(dense), 4), coupling), BadPartition);
}

TEST(MatchPaddingCoupling, UsesDiagonalAndOffDiagonalRms) {
  // diagonal {3, -4, 0}: rms 5/sqrt(3); off-diagonal six entries of 2: rms 2
  const DenseMatrix m(3, {3, 2, 2, 2, -4, 2, 2, 2, 0});
  const auto p = make_memory_provider(m, 2);
  MemoryGauge gauge;
  const PaddingCoupling c = match_padding_coupling(*p, 17, &gauge);
  EXPECT_DOUBLE_EQ(c.diagonal, 5.0 / std::sqrt(3.0));
  EXPECT_DOUBLE_EQ(c.scale, 2.0);
  EXPECT_EQ(c.seed, 17u);
  EXPECT_EQ(gauge.peak_blocks(), 1u);
}

TEST(MatchPaddingCoupling, FallsBack) {
  const auto diag_only = make_memory_provider(DenseMatrix(3, {2, 0, 0, 0, 2, 0, 0, 0, 2}), 2);
  EXPECT_DOUBLE_EQ(match_padding_coupling(*diag_only).scale, 2.0);
  const auto zero = make_memory_provider(DenseMatrix(3), 2);
  EXPECT_EQ(match_padding_coupling(*zero).diagonal, 1.0);
  EXPECT_EQ(match_padding_coupling(*zero).scale, 1.0);
}

TEST(MatchPaddingCoupling, ScaleEquivariant) {
  const Mat dense = random_shifted(7, 2, 7);
  const auto a = match_padding_coupling(*make_memory_provider(from_eigen(dense), 3));
  const auto b = match_padding_coupling(*make_memory_provider(from_eigen(dense * 8.0), 3));
  EXPECT_DOUBLE_EQ(b.diagonal, 8.0 * a.diagonal);
  EXPECT_DOUBLE_EQ(b.scale, 8.0 * a.scale);
}

TEST(CouplePadding, NeedsIdentityPadding) {
  const auto base = make_memory_provider(DenseMatrix::identity(3), 2);
  EXPECT_THROW(couple_padding(permute_provider(base, 2, 1)), BadPartition);
  const auto unpadded = make_memory_provider(DenseMatrix::identity(4), 2);
  EXPECT_EQ(couple_padding(unpadded), unpadded);
}

TEST(CacheProvider, ServesSameDataAndChargesOnlyResult) {
  const DenseMatrix m = from_eigen(random_shifted(8, 12, 0));
  const auto base = make_memory_provider(m, 4);
  const auto cached = cache_provider(base, 2);
  MemoryGauge gauge;
  for (int round = 0; round < 3; ++round)
    for (std::size_t a = 1; a <= 4; ++a) {
      const Block blk = cached->fetch(a, 1, &gauge);
      EXPECT_TRUE(bit_identical(blk, base->fetch(a, 1)));
      EXPECT_EQ(gauge.live_blocks(), 1u);
    }
}

}  // namespace
}  // namespace bri
