#include "bri/provider.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <list>
#include <mutex>
#include <string>
#include <unordered_map>

#include "bri/brim.hpp"
#include "bri/error.hpp"

namespace bri {

namespace {

void check_region(std::size_t order, std::size_t row0, std::size_t col0, std::size_t rows,
                  std::size_t cols, std::span<double> out, std::size_t out_stride) {
  if (row0 + rows > order || col0 + cols > order)
    throw IndexOutOfRange("region exceeds matrix order " + std::to_string(order));
  if (rows > 0 && (cols > out_stride || (rows - 1) * out_stride + cols > out.size()))
    throw DimensionMismatch(out.size(), (rows - 1) * out_stride + cols);
}

std::string pair_text(std::size_t a, std::size_t b) {
  return "(" + std::to_string(a) + ", " + std::to_string(b) + ")";
}

// splitmix64 finalizer
std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic value in [-1, 1] for (seed, which, i, j).
double hashed_unit(std::uint64_t seed, std::uint64_t which, std::uint64_t i, std::uint64_t j) {
  const std::uint64_t h = mix(mix(mix(seed ^ (which << 61)) ^ i) ^ (j * 0xd1342543de82ef95ULL));
  return static_cast<double>(h >> 11) * 0x1.0p-52 - 1.0;
}

}  // namespace

// ---------------------------------------------------------------- sources

void MemorySource::read(std::size_t row0, std::size_t col0, std::size_t rows, std::size_t cols,
                        std::span<double> out, std::size_t out_stride) const {
  check_region(order(), row0, col0, rows, cols, out, out_stride);
  for (std::size_t i = 0; i < rows; ++i) {
    const auto src = matrix_.data().subspan((row0 + i) * matrix_.order() + col0, cols);
    std::copy(src.begin(), src.end(), out.begin() + static_cast<std::ptrdiff_t>(i * out_stride));
  }
}

FileSource::FileSource(const std::filesystem::path& path) : path_(path) {
  const BrimHeader header = read_header(path);
  order_ = static_cast<std::size_t>(header.order);
  fd_ = ::open(path.c_str(), O_RDONLY | O_CLOEXEC);
  if (fd_ < 0) throw IoError("cannot open " + path.string() + ": " + std::strerror(errno));
}

FileSource::~FileSource() {
  if (fd_ >= 0) ::close(fd_);
}

void FileSource::read(std::size_t row0, std::size_t col0, std::size_t rows, std::size_t cols,
                      std::span<double> out, std::size_t out_stride) const {
  check_region(order_, row0, col0, rows, cols, out, out_stride);
  BrimHeader header;
  header.order = order_;
  for (std::size_t i = 0; i < rows; ++i) {
    auto* dst = reinterpret_cast<unsigned char*>(out.data() + i * out_stride);
    std::size_t remaining = cols * sizeof(double);
    std::uint64_t offset = header.element_offset(row0 + i, col0);
    while (remaining > 0) {
      const ssize_t n = ::pread(fd_, dst, remaining, static_cast<off_t>(offset));
      if (n < 0 && errno == EINTR) continue;
      if (n < 0)
        throw IoError("read from " + path_.string() + " failed: " + std::strerror(errno), offset);
      if (n == 0) throw IoError("unexpected end of " + path_.string(), offset);
      dst += n;
      remaining -= static_cast<std::size_t>(n);
      offset += static_cast<std::uint64_t>(n);
    }
    little_endian_to_host(out.subspan(i * out_stride, cols));
  }
}

void KernelSpec::validate() const {
  if (!(gamma > 0.0)) throw BadPartition("kernel gamma must be positive");
  if (!(sigma > 0.0)) throw BadPartition("kernel sigma must be positive");
  if (inputs.empty()) throw BadPartition("kernel needs at least one input vector");
  const std::size_t d = inputs.front().size();
  for (const auto& x : inputs)
    if (x.size() != d) throw BadPartition("kernel input vectors differ in dimension");
}

KernelSource::KernelSource(KernelSpec spec) : spec_(std::move(spec)) { spec_.validate(); }

double KernelSource::element(std::size_t row, std::size_t col) const {
  if (row == 0 && col == 0) return 0.0;
  if (row == 0 || col == 0) return 1.0;
  const auto& xi = spec_.inputs[row - 1];
  const auto& xj = spec_.inputs[col - 1];
  double dist2 = 0.0;
  for (std::size_t t = 0; t < xi.size(); ++t) {
    const double d = xi[t] - xj[t];
    dist2 += d * d;
  }
  double value = std::exp(-dist2 / (2.0 * spec_.sigma * spec_.sigma));
  if (row == col) value += 1.0 / spec_.gamma;
  return value;
}

void KernelSource::read(std::size_t row0, std::size_t col0, std::size_t rows, std::size_t cols,
                        std::span<double> out, std::size_t out_stride) const {
  check_region(order(), row0, col0, rows, cols, out, out_stride);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) out[i * out_stride + j] = element(row0 + i, col0 + j);
}

// -------------------------------------------------------------- providers

Block BlockProvider::fetch(std::size_t alpha, std::size_t beta, MemoryGauge* gauge) const {
  const auto& lay = layout();
  if (!lay.contains(alpha) || !lay.contains(beta))
    throw IndexOutOfRange("block " + pair_text(alpha, beta) + " outside 1.." +
                          std::to_string(lay.blocks()));
  return fetch_unchecked(alpha, beta, gauge);
}

namespace {

class AugmentedProvider final : public BlockProvider {
 public:
  AugmentedProvider(std::shared_ptr<const MatrixSource> source, const BlockLayout& layout)
      : source_(std::move(source)), layout_(layout) {}

  const BlockLayout& layout() const override { return layout_; }
  bool has_identity_padding() const override { return true; }

 private:
  Block fetch_unchecked(std::size_t alpha, std::size_t beta, MemoryGauge* gauge) const override {
    const std::size_t b = layout_.block_order();
    const std::size_t m = layout_.order();
    const std::size_t r0 = layout_.offset(alpha);
    const std::size_t c0 = layout_.offset(beta);
    Block out(b, gauge);
    const std::size_t rows = r0 < m ? std::min(b, m - r0) : 0;
    const std::size_t cols = c0 < m ? std::min(b, m - c0) : 0;
    if (rows > 0 && cols > 0) source_->read(r0, c0, rows, cols, out.data(), b);
    // identity padding on the global diagonal beyond m
    for (std::size_t i = 0; i < b; ++i) {
      const std::size_t gi = r0 + i;
      if (gi >= m && gi >= c0 && gi < c0 + b) out(i, gi - c0) = 1.0;
    }
    return out;
  }

  std::shared_ptr<const MatrixSource> source_;
  BlockLayout layout_;
};

class PermutedView final : public BlockProvider {
 public:
  PermutedView(ProviderPtr base, std::size_t alpha, std::size_t beta)
      : base_(std::move(base)), alpha_(alpha), beta_(beta) {}

  const BlockLayout& layout() const override { return base_->layout(); }
  bool has_identity_padding() const override {
    return alpha_ == 1 && beta_ == 1 && base_->has_identity_padding();
  }

 private:
  static std::size_t swap_with_first(std::size_t index, std::size_t target) {
    if (index == 1) return target;
    if (index == target) return 1;
    return index;
  }

  Block fetch_unchecked(std::size_t i, std::size_t j, MemoryGauge* gauge) const override {
    return base_->fetch(swap_with_first(i, beta_), swap_with_first(j, alpha_), gauge);
  }

  ProviderPtr base_;
  std::size_t alpha_;
  std::size_t beta_;
};

class CoupledPaddingView final : public BlockProvider {
 public:
  CoupledPaddingView(ProviderPtr base, PaddingCoupling coupling)
      : base_(std::move(base)), coupling_(coupling) {}

  const BlockLayout& layout() const override { return base_->layout(); }

 private:
  double p(std::size_t row, std::size_t t) const {
    return coupling_.scale * hashed_unit(coupling_.seed, 0, row, t);
  }
  double q(std::size_t t, std::size_t col) const {
    return coupling_.scale * hashed_unit(coupling_.seed, 1, t, col);
  }

  Block fetch_unchecked(std::size_t alpha, std::size_t beta, MemoryGauge* gauge) const override {
    Block out = base_->fetch(alpha, beta, gauge);
    const auto& lay = layout();
    const std::size_t b = lay.block_order();
    const std::size_t m = lay.order();
    const std::size_t l = lay.padding();
    const std::size_t r0 = lay.offset(alpha);
    const std::size_t c0 = lay.offset(beta);
    for (std::size_t i = 0; i < b; ++i) {
      const std::size_t gi = r0 + i;
      for (std::size_t j = 0; j < b; ++j) {
        const std::size_t gj = c0 + j;
        if (gi < m && gj < m) {
          double pq = 0.0;
          for (std::size_t t = 0; t < l; ++t) pq += p(gi, t) * q(t, gj);
          out(i, j) += pq / coupling_.diagonal;
        } else if (gi < m) {
          out(i, j) += p(gi, gj - m);
        } else if (gj < m) {
          out(i, j) += q(gi - m, gj);
        } else if (gi == gj) {
          out(i, j) = coupling_.diagonal;
        }
      }
    }
    return out;
  }

  ProviderPtr base_;
  PaddingCoupling coupling_;
};

class CachedProvider final : public BlockProvider {
 public:
  CachedProvider(ProviderPtr base, std::size_t capacity)
      : base_(std::move(base)), capacity_(capacity) {}

  const BlockLayout& layout() const override { return base_->layout(); }
  bool has_identity_padding() const override { return base_->has_identity_padding(); }

 private:
  Block fetch_unchecked(std::size_t alpha, std::size_t beta, MemoryGauge* gauge) const override {
    const std::size_t key = (alpha - 1) * layout().blocks() + (beta - 1);
    {
      std::lock_guard lock(mutex_);
      if (auto it = index_.find(key); it != index_.end()) {
        lru_.splice(lru_.begin(), lru_, it->second);
        return Block(it->second->block.order(), it->second->block.data(), gauge);
      }
    }
    Block fresh = base_->fetch(alpha, beta, nullptr);
    Block result(fresh.order(), fresh.data(), gauge);
    if (capacity_ > 0) {
      std::lock_guard lock(mutex_);
      if (index_.find(key) == index_.end()) {
        lru_.push_front(Entry{key, std::move(fresh)});
        index_[key] = lru_.begin();
        if (lru_.size() > capacity_) {
          index_.erase(lru_.back().key);
          lru_.pop_back();
        }
      }
    }
    return result;
  }

  struct Entry {
    std::size_t key;
    Block block;
  };

  ProviderPtr base_;
  std::size_t capacity_;
  mutable std::mutex mutex_;
  mutable std::list<Entry> lru_;
  mutable std::unordered_map<std::size_t, std::list<Entry>::iterator> index_;
};

}  // namespace

ProviderPtr augment_provider(std::shared_ptr<const MatrixSource> source, const BlockLayout& layout) {
  if (!source) throw BadPartition("augment_provider needs a source");
  if (source->order() != layout.order())
    throw BadPartition("layout order " + std::to_string(layout.order()) +
                       " does not match source order " + std::to_string(source->order()));
  return std::make_shared<AugmentedProvider>(std::move(source), layout);
}

ProviderPtr make_memory_provider(DenseMatrix matrix, std::size_t k) {
  const auto layout = BlockLayout::for_order(matrix.order(), k);
  return augment_provider(std::make_shared<MemorySource>(std::move(matrix)), layout);
}

ProviderPtr make_file_provider(const std::filesystem::path& path, std::size_t k) {
  auto source = std::make_shared<FileSource>(path);
  const auto layout = BlockLayout::for_order(source->order(), k);
  return augment_provider(std::move(source), layout);
}

ProviderPtr make_kernel_provider(KernelSpec spec, std::size_t k) {
  auto source = std::make_shared<KernelSource>(std::move(spec));
  const auto layout = BlockLayout::for_order(source->order(), k);
  return augment_provider(std::move(source), layout);
}

ProviderPtr permute_provider(ProviderPtr base, std::size_t alpha, std::size_t beta) {
  const auto& lay = base->layout();
  if (!lay.contains(alpha) || !lay.contains(beta))
    throw IndexOutOfRange("permutation target " + pair_text(alpha, beta) + " outside 1.." +
                          std::to_string(lay.blocks()));
  if (alpha == 1 && beta == 1) return base;
  return std::make_shared<PermutedView>(std::move(base), alpha, beta);
}

ProviderPtr couple_padding(ProviderPtr base, PaddingCoupling coupling) {
  if (base->layout().padding() == 0) return base;
  if (!base->has_identity_padding())
    throw BadPartition("couple_padding needs an unpermuted augmented provider");
  if (!(coupling.diagonal > 0.0)) throw BadPartition("padding diagonal must be positive");
  return std::make_shared<CoupledPaddingView>(std::move(base), coupling);
}

PaddingCoupling match_padding_coupling(const BlockProvider& augmented, std::uint64_t seed,
                                       MemoryGauge* gauge) {
  const BlockLayout& lay = augmented.layout();
  const std::size_t k = lay.blocks();
  const std::size_t b = lay.block_order();
  const std::size_t m = lay.order();
  double diag_sq = 0.0;
  double off_sq = 0.0;
  for (std::size_t alpha = 1; alpha <= k; ++alpha)
    for (std::size_t beta = 1; beta <= k; ++beta) {
      const Block block = augmented.fetch(alpha, beta, gauge);
      for (std::size_t i = 0; i < b && lay.offset(alpha) + i < m; ++i)
        for (std::size_t j = 0; j < b && lay.offset(beta) + j < m; ++j) {
          const double v = block(i, j);
          (lay.offset(alpha) + i == lay.offset(beta) + j ? diag_sq : off_sq) += v * v;
        }
    }
  const double diag = std::sqrt(diag_sq / static_cast<double>(m));
  const double off = m > 1 ? std::sqrt(off_sq / static_cast<double>(m * (m - 1))) : 0.0;
  auto usable = [](double v) { return std::isfinite(v) && v > 0.0; };

  PaddingCoupling out;
  out.seed = seed;
  out.diagonal = usable(diag) ? diag : usable(off) ? off : 1.0;
  out.scale = usable(off) ? off : out.diagonal;
  return out;
}

ProviderPtr cache_provider(ProviderPtr base, std::size_t capacity) {
  return std::make_shared<CachedProvider>(std::move(base), capacity);
}

}  // namespace bri
