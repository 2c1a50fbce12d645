#pragma once

#include <cstdint>
#include <span>

namespace rfmesh::framing {

/// Reflected CRC-32 (IEEE 802.3, poly 0x04C11DB7, init and xorout 0xFFFFFFFF).
std::uint32_t crc32(std::span<const std::uint8_t> data);

/// Residue left by crc32 over a message followed by its own CRC (little-endian).
inline constexpr std::uint32_t kCrc32Residue = 0x2144DF1C;

/// CRC-16/CCITT-FALSE: poly 0x1021, init 0xFFFF, MSB-first, no final xor.
std::uint16_t crc16_ccitt(std::span<const std::uint8_t> data);

} // namespace rfmesh::framing
