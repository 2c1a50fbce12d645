#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "rfmesh/framing/bits.hpp"

namespace rfmesh::framing {

enum class Modulation : std::uint8_t { Qpsk = 0, Qam16 = 1 };
enum class DiversityMode : std::uint8_t { Alamouti = 0, SingleTxMrc = 1 };

int bits_per_symbol(Modulation m);
std::string_view to_string(Modulation m);
std::string_view to_string(DiversityMode d);

inline constexpr std::uint8_t kBroadcast = 0xFF;
inline constexpr int kNodeCount = 4;
inline constexpr std::uint64_t kDefaultTrainingSeed = 0x5EEDC0DEULL;

/// Symbol-level frame layout. The header always rides QPSK; payload and CRC use
/// the frame's modulation. A guard of silence separates consecutive frames.
struct FrameLayout {
    int preamble_symbols = 512;
    int training_len = 64;
    int pilot_period = 32;
    int header_len = 16;
    int max_payload = 8192;
    int crc_len = 4;
    int guard_symbols = 64;

    int header_symbols() const { return header_len * 8 / 2; }
};

struct FrameDescriptor {
    std::uint8_t version = 1;
    int src_node = 0;
    int dst_node = 1;
    std::uint32_t seq = 0;
    std::uint16_t payload_len = 0;
    Modulation modulation = Modulation::Qam16;
    DiversityMode diversity_mode = DiversityMode::Alamouti;
    bool prbs_payload = false;
    bool header_crc_ok = false;
    bool payload_crc_ok = false;

    bool operator==(const FrameDescriptor&) const = default;
};

/// Symbol offsets of each segment, relative to the first preamble chip.
/// Within the payload block a pilot follows every `pilot_period` data symbols.
struct FrameGeometry {
    std::size_t preamble_start = 0;
    std::size_t training_a_start = 0;
    std::size_t training_b_start = 0;
    std::size_t header_start = 0;
    std::size_t payload_start = 0;
    std::size_t payload_data_symbols = 0;
    std::size_t pilot_count = 0;
    std::size_t crc_start = 0;
    std::size_t crc_symbols = 0;
    std::size_t total_symbols = 0;
    std::size_t pilot_period = 32;

    std::size_t payload_block_symbols() const { return payload_data_symbols + pilot_count; }
    bool is_pilot(std::size_t symbol) const
    {
        if (symbol < payload_start || symbol >= crc_start) return false;
        return (symbol - payload_start + 1) % (pilot_period + 1) == 0;
    }
};

FrameGeometry frame_geometry(std::size_t payload_len, Modulation modulation, const FrameLayout& layout = {});

enum class SegmentKind { Preamble, TrainingA, TrainingB, Header, Payload, Crc };

struct Segment {
    SegmentKind kind;
    std::size_t bit_offset;
    std::size_t bit_count;
    std::size_t symbol_offset;
    std::size_t symbol_count;   // payload segment includes its pilot positions
};

/// Frame bit stream with segment boundaries. Preamble chips are carried as
/// bits (0 -> +1, 1 -> -1); training bits are the QPSK labels of the known
/// sequences; pilots occupy symbol positions only.
struct EncodedFrame {
    FrameDescriptor descriptor;
    ByteVector header_bytes;
    ByteVector payload;
    std::uint32_t crc = 0;
    BitVector bits;
    std::vector<Segment> segments;
    FrameGeometry geometry;

    const Segment& segment(SegmentKind kind) const;
    std::span<const std::uint8_t> segment_bits(SegmentKind kind) const;
};

/// 16-byte header: version src dst seq(4, LE) payload_len(2, LE) modulation
/// flags crc16(2, LE) reserved(3). CRC-16 covers bytes 0..10.
/// Flags: bit 0 single-TX MRC diversity, bit 1 PRBS test payload.
ByteVector pack_header(const FrameDescriptor& desc);

/// Payload CRC-32 over header bytes followed by the payload.
std::uint32_t payload_crc(std::span<const std::uint8_t> header_bytes, std::span<const std::uint8_t> payload);

EncodedFrame encode_frame(const FrameDescriptor& desc, std::span<const std::uint8_t> payload, const FrameLayout& layout = {});

/// Parses 128 header bits. Fields are returned even when the CRC fails;
/// payload_crc_ok is always false here.
FrameDescriptor decode_header(std::span<const std::uint8_t> header_bits);

struct DecodedFrame {
    FrameDescriptor descriptor;
    ByteVector payload;
};

/// Bit-level inverse of encode_frame on a full frame bit stream: parses the
/// header, slices payload and CRC by the header's length, and sets both CRC flags.
DecodedFrame decode_frame(std::span<const std::uint8_t> frame_bits, const FrameLayout& layout = {});

/// Ga256 followed by Gb256 as +1/-1 chips (512 chips = 64 bytes).
std::vector<int> build_preamble();

struct TrainingSequences {
    std::vector<std::complex<double>> antenna_a;
    std::vector<std::complex<double>> antenna_b;
    BitVector bits_a;
    BitVector bits_b;
    std::complex<double> pilot_symbol;
};

/// Two 64-symbol QPSK sequences drawn from std::mt19937_64(seed), two bits per
/// symbol from the top bits of successive outputs. Pilot is (1 + j)/sqrt(2).
TrainingSequences training_sequences(std::uint64_t seed = kDefaultTrainingSeed, int length = 64);

/// Unit-power Gray QPSK: bit pair (b1 b0) -> ((2 b1 - 1) + j (2 b0 - 1)) / sqrt(2).
std::complex<double> qpsk_point(std::uint8_t b1, std::uint8_t b0);

} // namespace rfmesh::framing
