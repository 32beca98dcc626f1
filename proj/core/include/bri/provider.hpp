#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <vector>

#include "bri/block.hpp"
#include "bri/dense_matrix.hpp"
#include "bri/layout.hpp"

namespace bri {

/// Element-level access to an m x m matrix that need not be resident.
class MatrixSource {
 public:
  virtual ~MatrixSource() = default;

  virtual std::size_t order() const = 0;

  /// Copies the rows x cols region starting at (row0, col0) into `out`,
  /// row r of the region landing at out[r * out_stride]. The region must lie
  /// inside the matrix. Must be safe to call concurrently.
  virtual void read(std::size_t row0, std::size_t col0, std::size_t rows, std::size_t cols,
                    std::span<double> out, std::size_t out_stride) const = 0;
};

/// Source over a resident matrix.
class MemorySource final : public MatrixSource {
 public:
  explicit MemorySource(DenseMatrix matrix) : matrix_(std::move(matrix)) {}
  std::size_t order() const override { return matrix_.order(); }
  void read(std::size_t row0, std::size_t col0, std::size_t rows, std::size_t cols,
            std::span<double> out, std::size_t out_stride) const override;

 private:
  DenseMatrix matrix_;
};

/// Source over a BRIM file. Each region row is one positioned read straight
/// into the caller's buffer, so nothing beyond the destination block is
/// buffered. Reads use pread and are safe to issue concurrently.
class FileSource final : public MatrixSource {
 public:
  /// Throws IoError if the file cannot be opened and FormatError if the
  /// header or size is wrong.
  explicit FileSource(const std::filesystem::path& path);
  ~FileSource() override;
  FileSource(const FileSource&) = delete;
  FileSource& operator=(const FileSource&) = delete;

  std::size_t order() const override { return order_; }
  void read(std::size_t row0, std::size_t col0, std::size_t rows, std::size_t cols,
            std::span<double> out, std::size_t out_stride) const override;

 private:
  std::filesystem::path path_;
  int fd_ = -1;
  std::size_t order_ = 0;
};

/// Parameters of the bordered LS-SVM matrix
///   A = [[0, 1^T], [1, K + I/gamma]],  K_ij = exp(-|x_i - x_j|^2 / (2 sigma^2)).
struct KernelSpec {
  double gamma = 1.0;
  double sigma = 1.0;
  std::vector<std::vector<double>> inputs;

  /// Throws BadPartition when gamma or sigma is not positive, inputs is
  /// empty or the input vectors differ in dimension.
  void validate() const;
};

/// Source computing A elements on demand from the kernel inputs; order n + 1.
class KernelSource final : public MatrixSource {
 public:
  explicit KernelSource(KernelSpec spec);
  std::size_t order() const override { return spec_.inputs.size() + 1; }
  void read(std::size_t row0, std::size_t col0, std::size_t rows, std::size_t cols,
            std::span<double> out, std::size_t out_stride) const override;
  double element(std::size_t row, std::size_t col) const;

 private:
  KernelSpec spec_;
};

/// On-demand access to the blocks of a (possibly virtual) k x k block matrix.
class BlockProvider {
 public:
  virtual ~BlockProvider() = default;

  virtual const BlockLayout& layout() const = 0;

  /// Block (alpha, beta), 1-based. Allocates exactly one buffer, registered
  /// with `gauge`. Repeated fetches are bit-identical. Throws IndexOutOfRange.
  Block fetch(std::size_t alpha, std::size_t beta, MemoryGauge* gauge = nullptr) const;

  /// True when elements beyond order m are exactly those of the identity
  /// padding at their natural positions, i.e. the provider is an unpermuted
  /// augmentation.
  virtual bool has_identity_padding() const { return false; }

 private:
  virtual Block fetch_unchecked(std::size_t alpha, std::size_t beta, MemoryGauge* gauge) const = 0;
};

using ProviderPtr = std::shared_ptr<const BlockProvider>;

inline Block fetch_block(const BlockProvider& provider, std::size_t alpha, std::size_t beta,
                         MemoryGauge* gauge = nullptr) {
  return provider.fetch(alpha, beta, gauge);
}

/// The augmented matrix [[M, 0], [0, I_l]] partitioned by `layout`; with
/// l == 0 this is M itself. Throws BadPartition if layout.order() differs
/// from the source order.
ProviderPtr augment_provider(std::shared_ptr<const MatrixSource> source, const BlockLayout& layout);

ProviderPtr make_memory_provider(DenseMatrix matrix, std::size_t k);
ProviderPtr make_file_provider(const std::filesystem::path& path, std::size_t k);
ProviderPtr make_kernel_provider(KernelSpec spec, std::size_t k);

/// Index-mapping view: block row beta and block column alpha of the base
/// move to position 1. The (1,1) block of the view's inverse is block
/// (alpha, beta) of the base's inverse. Self-inverse for fixed (alpha, beta).
ProviderPtr permute_provider(ProviderPtr base, std::size_t alpha, std::size_t beta);

inline constexpr std::uint64_t kDefaultCouplingSeed = 0x5eed;

struct PaddingCoupling {
  double scale = 1.0;     // P and Q entries lie in [-scale, scale]
  double diagonal = 1.0;  // d, the padding corner is d I
  std::uint64_t seed = kDefaultCouplingSeed;
};

/// Turns an augmented provider [[M, 0], [0, I]] into
///   [[M + P Q / d, P], [Q, d I]]
/// with fixed pseudo-random P (m x l) and Q (l x m). Eliminating the d I
/// corner leaves M, so the leading m x m part of the inverse is still M^-1,
/// but no block of the coupled matrix is structurally singular.
/// Requires base->has_identity_padding() and d > 0; a no-op when l == 0.
ProviderPtr couple_padding(ProviderPtr base, PaddingCoupling coupling = {});

/// Coupling sized like the matrix itself: d is the RMS of the diagonal of M
/// and scale the RMS of its off-diagonal entries (each falling back to the
/// other, then to 1, when zero). One pass over all k^2 blocks, one block
/// resident at a time.
PaddingCoupling match_padding_coupling(const BlockProvider& augmented,
                                       std::uint64_t seed = kDefaultCouplingSeed,
                                       MemoryGauge* gauge = nullptr);

/// Keeps up to `capacity` recently fetched blocks outside any gauge.
ProviderPtr cache_provider(ProviderPtr base, std::size_t capacity);

}  // namespace bri
