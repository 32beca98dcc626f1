#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <span>
#include <string>

#include "bri/dense_matrix.hpp"
#include "bri/instrumentation.hpp"
#include "bri/layout.hpp"
#include "bri/sink.hpp"

namespace bri {

// BRIM layout, all little-endian:
//   0..3   magic "BRIM"
//   4..7   version (u32) = 1
//   8..15  order m (u64)
//   16     dtype tag = 1 (f64)
//   17..23 reserved, zero
//   24..   m * m f64 values, row-major
inline constexpr std::size_t kBrimHeaderBytes = 24;
inline constexpr std::uint32_t kBrimVersion = 1;
inline constexpr std::uint8_t kBrimDtypeF64 = 1;

struct BrimHeader {
  std::uint32_t version = kBrimVersion;
  std::uint64_t order = 0;
  std::uint8_t dtype = kBrimDtypeF64;

  std::uint64_t file_bytes() const noexcept { return kBrimHeaderBytes + 8 * order * order; }
  /// Byte offset of element (row, col).
  std::uint64_t element_offset(std::uint64_t row, std::uint64_t col) const noexcept {
    return kBrimHeaderBytes + 8 * (row * order + col);
  }
};

std::array<unsigned char, kBrimHeaderBytes> encode_header(const BrimHeader& header);
/// Throws FormatError on bad magic, version, dtype, reserved bytes or m == 0.
BrimHeader decode_header(std::span<const unsigned char> bytes);

/// Throws IoError.
void write_matrix(const std::filesystem::path& path, const DenseMatrix& matrix);
/// Validates the header and that the file is exactly 24 + 8 m^2 bytes.
/// Throws IoError or FormatError.
BrimHeader read_header(const std::filesystem::path& path);
DenseMatrix read_matrix(const std::filesystem::path& path);

/// Converts between host doubles and little-endian storage, in place.
void host_to_little_endian(std::span<double> values) noexcept;
inline void little_endian_to_host(std::span<double> values) noexcept {
  host_to_little_endian(values);
}

/// Streams inverse blocks into a BRIM file of order m, dropping padding.
///
/// Output goes to "<path>.partial", sized up front; blocks may arrive in any
/// order and are written with positioned writes. finalize() checks that all
/// k^2 blocks arrived and renames the file into place; after abort() the
/// .partial file stays behind as the marker of an incomplete result.
class InverseFileSink final : public BlockSink {
 public:
  InverseFileSink(std::filesystem::path path, const BlockLayout& layout);
  ~InverseFileSink() override;
  InverseFileSink(const InverseFileSink&) = delete;
  InverseFileSink& operator=(const InverseFileSink&) = delete;

  void accept(std::size_t alpha, std::size_t beta, const Block& block) override;
  void finalize() override;
  void abort() noexcept override;

  const std::filesystem::path& partial_path() const noexcept { return partial_; }

 private:
  void close_fd() noexcept;

  std::filesystem::path path_;
  std::filesystem::path partial_;
  BlockLayout layout_;
  BrimHeader header_;
  int fd_ = -1;
  BlockTally tally_;
  std::mutex mutex_;
};

inline std::unique_ptr<InverseFileSink> write_inverse_sink(const std::filesystem::path& path,
                                                           const BlockLayout& layout) {
  return std::make_unique<InverseFileSink>(path, layout);
}

/// "method,m,k,wall_ms,peak_bytes,n_block_inv,n_block_mul,seed"
std::string bench_csv_header();
std::string to_csv_row(const BenchRecord& record);
void write_bench_csv(std::ostream& out, std::span<const BenchRecord> records);

}  // namespace bri
