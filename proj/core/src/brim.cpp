#include "bri/brim.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <bit>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <ostream>
#include <sstream>
#include <vector>

#include "bri/error.hpp"

namespace bri {

namespace {

template <class T>
void put_le(unsigned char* dst, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) dst[i] = static_cast<unsigned char>(value >> (8 * i));
}

template <class T>
T get_le(const unsigned char* src) {
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(src[i]) << (8 * i);
  return value;
}

std::string errno_text() { return std::strerror(errno); }

void pwrite_all(int fd, const void* data, std::size_t bytes, std::uint64_t offset,
                const std::filesystem::path& path) {
  const auto* p = static_cast<const unsigned char*>(data);
  while (bytes > 0) {
    const ssize_t n = ::pwrite(fd, p, bytes, static_cast<off_t>(offset));
    if (n < 0) {
      if (errno == EINTR) continue;
      throw IoError("write to " + path.string() + " failed: " + errno_text(), offset);
    }
    p += n;
    bytes -= static_cast<std::size_t>(n);
    offset += static_cast<std::uint64_t>(n);
  }
}

}  // namespace

void host_to_little_endian(std::span<double> values) noexcept {
  if constexpr (std::endian::native == std::endian::little) {
    return;
  } else {
    for (double& v : values) {
      auto bits = std::bit_cast<std::uint64_t>(v);
      std::uint64_t swapped = 0;
      for (int i = 0; i < 8; ++i) swapped = (swapped << 8) | ((bits >> (8 * i)) & 0xff);
      v = std::bit_cast<double>(swapped);
    }
  }
}

std::array<unsigned char, kBrimHeaderBytes> encode_header(const BrimHeader& header) {
  std::array<unsigned char, kBrimHeaderBytes> bytes{};
  std::memcpy(bytes.data(), "BRIM", 4);
  put_le<std::uint32_t>(bytes.data() + 4, header.version);
  put_le<std::uint64_t>(bytes.data() + 8, header.order);
  bytes[16] = header.dtype;
  return bytes;
}

BrimHeader decode_header(std::span<const unsigned char> bytes) {
  if (bytes.size() < kBrimHeaderBytes) throw FormatError("BRIM header truncated");
  if (std::memcmp(bytes.data(), "BRIM", 4) != 0) throw FormatError("bad BRIM magic");
  BrimHeader h;
  h.version = get_le<std::uint32_t>(bytes.data() + 4);
  h.order = get_le<std::uint64_t>(bytes.data() + 8);
  h.dtype = bytes[16];
  if (h.version != kBrimVersion)
    throw FormatError("unsupported BRIM version " + std::to_string(h.version));
  if (h.dtype != kBrimDtypeF64)
    throw FormatError("unsupported BRIM dtype tag " + std::to_string(h.dtype));
  for (std::size_t i = 17; i < kBrimHeaderBytes; ++i)
    if (bytes[i] != 0) throw FormatError("non-zero BRIM reserved byte at offset " + std::to_string(i));
  if (h.order == 0) throw FormatError("BRIM order must be positive");
  // 8 m^2 must not overflow 64 bits
  if (h.order > (std::uint64_t{1} << 30)) throw FormatError("BRIM order implausibly large");
  return h;
}

void write_matrix(const std::filesystem::path& path, const DenseMatrix& matrix) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  BrimHeader header;
  header.order = matrix.order();
  const auto head = encode_header(header);
  out.write(reinterpret_cast<const char*>(head.data()), head.size());

  std::vector<double> row(matrix.data().begin(), matrix.data().end());
  host_to_little_endian(row);
  out.write(reinterpret_cast<const char*>(row.data()),
            static_cast<std::streamsize>(row.size() * sizeof(double)));
  out.flush();
  if (!out) throw IoError("write to " + path.string() + " failed");
}

BrimHeader read_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::array<unsigned char, kBrimHeaderBytes> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (in.gcount() != static_cast<std::streamsize>(bytes.size()))
    throw FormatError(path.string() + ": file shorter than the 24-byte BRIM header");
  const BrimHeader header = decode_header(bytes);

  std::error_code ec;
  const auto size = std::filesystem::file_size(path, ec);
  if (ec) throw IoError("cannot stat " + path.string() + ": " + ec.message());
  if (size != header.file_bytes())
    throw FormatError(path.string() + ": expected " + std::to_string(header.file_bytes()) +
                      " bytes for order " + std::to_string(header.order) + ", found " +
                      std::to_string(size));
  return header;
}

DenseMatrix read_matrix(const std::filesystem::path& path) {
  const BrimHeader header = read_header(path);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  in.seekg(kBrimHeaderBytes);
  DenseMatrix m(header.order);
  in.read(reinterpret_cast<char*>(m.data().data()),
          static_cast<std::streamsize>(m.data().size() * sizeof(double)));
  if (!in) throw IoError("short read from " + path.string(), kBrimHeaderBytes);
  little_endian_to_host(m.data());
  return m;
}

InverseFileSink::InverseFileSink(std::filesystem::path path, const BlockLayout& layout)
    : path_(std::move(path)),
      partial_(path_.string() + ".partial"),
      layout_(layout),
      tally_(layout.blocks()) {
  header_.order = layout.order();
  fd_ = ::open(partial_.c_str(), O_RDWR | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd_ < 0) throw IoError("cannot create " + partial_.string() + ": " + errno_text());
  const auto head = encode_header(header_);
  pwrite_all(fd_, head.data(), head.size(), 0, partial_);
  if (::ftruncate(fd_, static_cast<off_t>(header_.file_bytes())) != 0) {
    close_fd();
    throw IoError("cannot size " + partial_.string() + ": " + errno_text());
  }
}

InverseFileSink::~InverseFileSink() { close_fd(); }

void InverseFileSink::close_fd() noexcept {
  if (fd_ >= 0) ::close(fd_);
  fd_ = -1;
}

void InverseFileSink::accept(std::size_t alpha, std::size_t beta, const Block& block) {
  if (block.order() != layout_.block_order())
    throw DimensionMismatch(block.order(), layout_.block_order());
  std::lock_guard lock(mutex_);
  if (fd_ < 0) throw IoError("sink for " + path_.string() + " is closed");
  tally_.mark(alpha, beta);

  const std::size_t m = layout_.order();
  const std::size_t r0 = layout_.offset(alpha);
  const std::size_t c0 = layout_.offset(beta);
  if (r0 >= m || c0 >= m) return;  // pure padding
  const std::size_t rows = std::min(block.order(), m - r0);
  const std::size_t cols = std::min(block.order(), m - c0);
  std::vector<double> segment(cols);
  for (std::size_t i = 0; i < rows; ++i) {
    auto src = block.row(i);
    std::copy(src.begin(), src.begin() + static_cast<std::ptrdiff_t>(cols), segment.begin());
    host_to_little_endian(segment);
    pwrite_all(fd_, segment.data(), cols * sizeof(double), header_.element_offset(r0 + i, c0),
               partial_);
  }
}

void InverseFileSink::finalize() {
  std::lock_guard lock(mutex_);
  tally_.require_complete();
  if (fd_ >= 0 && ::fsync(fd_) != 0) throw IoError("fsync " + partial_.string() + " failed");
  close_fd();
  std::error_code ec;
  std::filesystem::rename(partial_, path_, ec);
  if (ec) throw IoError("cannot rename " + partial_.string() + ": " + ec.message());
}

void InverseFileSink::abort() noexcept {
  std::lock_guard lock(mutex_);
  close_fd();
}

std::string bench_csv_header() { return "method,m,k,wall_ms,peak_bytes,n_block_inv,n_block_mul,seed"; }

std::string to_csv_row(const BenchRecord& r) {
  std::ostringstream os;
  os.precision(6);
  os << std::fixed << to_string(r.method) << ',' << r.m << ',' << r.k << ',' << r.wall_ms << ','
     << r.peak_bytes << ',' << r.counters.block_inversions << ','
     << r.counters.block_multiplications << ',' << r.seed;
  return os.str();
}

void write_bench_csv(std::ostream& out, std::span<const BenchRecord> records) {
  out << bench_csv_header() << '\n';
  for (const auto& r : records) out << to_csv_row(r) << '\n';
}

}  // namespace bri
