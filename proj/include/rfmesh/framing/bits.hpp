#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace rfmesh::framing {

/// One bit per element, values 0 or 1.
using BitVector = std::vector<std::uint8_t>;
using ByteVector = std::vector<std::uint8_t>;

/// MSB-first within each byte.
BitVector bytes_to_bits(std::span<const std::uint8_t> bytes);
ByteVector bits_to_bytes(std::span<const std::uint8_t> bits);

/// PRBS-23 (x^23 + x^18 + 1) Fibonacci generator. A zero seed is replaced
/// by all-ones since the all-zero state is a fixed point.
class Prbs23 {
public:
    explicit Prbs23(std::uint32_t seed = 0x7FFFFF);
    std::uint8_t next_bit();
    BitVector bits(std::size_t count);
    ByteVector bytes(std::size_t count);

private:
    std::uint32_t state_;
};

/// Payload for the frame with sequence `seq` on link src -> dst in PRBS test
/// mode. Both ends derive it from header fields alone.
ByteVector prbs_payload(int src, int dst, std::uint32_t seq, std::size_t length);

} // namespace rfmesh::framing
