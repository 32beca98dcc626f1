#include "bri/error.hpp"

namespace bri {

DimensionMismatch::DimensionMismatch(std::size_t lhs, std::size_t rhs)
    : Error("block order mismatch: " + std::to_string(lhs) + " vs " + std::to_string(rhs)) {}

SingularBlock::SingularBlock(std::size_t pivot_index)
    : Error("singular block: pivot " + std::to_string(pivot_index) + " below threshold"),
      pivot_index_(pivot_index) {}

IoError::IoError(const std::string& what, std::uint64_t byte_offset)
    : Error(what + " (at byte offset " + std::to_string(byte_offset) + ")"),
      byte_offset_(byte_offset) {}

IoError::IoError(const std::string& what) : Error(what) {}

MissingBlocks::MissingBlocks(std::size_t received, std::size_t expected)
    : Error("sink finalized with " + std::to_string(received) + " of " + std::to_string(expected) +
            " blocks"),
      received_(received),
      expected_(expected) {}

GaugeUnderflow::GaugeUnderflow() : Error("memory gauge underflow: buffer released twice") {}

}  // namespace bri
