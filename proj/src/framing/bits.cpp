#include "rfmesh/framing/bits.hpp"

#include "rfmesh/errors.hpp"

namespace rfmesh::framing {

BitVector bytes_to_bits(std::span<const std::uint8_t> bytes)
{
    BitVector bits;
    bits.reserve(bytes.size() * 8);
    for (std::uint8_t b : bytes)
        for (int k = 7; k >= 0; --k) bits.push_back(static_cast<std::uint8_t>((b >> k) & 1U));
    return bits;
}

ByteVector bits_to_bytes(std::span<const std::uint8_t> bits)
{
    if (bits.size() % 8 != 0) throw ContractError("bits_to_bytes: bit count must be a multiple of 8");
    ByteVector bytes(bits.size() / 8);
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        std::uint8_t v = 0;
        for (int k = 0; k < 8; ++k) v = static_cast<std::uint8_t>((v << 1) | (bits[i * 8 + k] & 1U));
        bytes[i] = v;
    }
    return bytes;
}

Prbs23::Prbs23(std::uint32_t seed)
    : state_(seed & 0x7FFFFFU)
{
    if (state_ == 0) state_ = 0x7FFFFFU;
}

std::uint8_t Prbs23::next_bit()
{
    const std::uint32_t bit = ((state_ >> 22) ^ (state_ >> 17)) & 1U;
    state_ = ((state_ << 1) | bit) & 0x7FFFFFU;
    return static_cast<std::uint8_t>(bit);
}

BitVector Prbs23::bits(std::size_t count)
{
    BitVector out(count);
    for (auto& b : out) b = next_bit();
    return out;
}

ByteVector Prbs23::bytes(std::size_t count)
{
    ByteVector out(count);
    for (auto& byte : out) {
        std::uint8_t v = 0;
        for (int k = 0; k < 8; ++k) v = static_cast<std::uint8_t>((v << 1) | next_bit());
        byte = v;
    }
    return out;
}

ByteVector prbs_payload(int src, int dst, std::uint32_t seq, std::size_t length)
{
    // Mix the identifiers into a 23-bit seed (golden-ratio hash).
    std::uint64_t h = (static_cast<std::uint64_t>(src & 0xFF) << 40) ^ (static_cast<std::uint64_t>(dst & 0xFF) << 32) ^ seq;
    h *= 0x9E3779B97F4A7C15ULL;
    h ^= h >> 29;
    Prbs23 gen(static_cast<std::uint32_t>(h & 0x7FFFFFU));
    return gen.bytes(length);
}

} // namespace rfmesh::framing
