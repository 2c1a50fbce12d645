#include "rfmesh/framing/frame.hpp"

#include <cmath>
#include <random>

#include "rfmesh/dsp/golay.hpp"
#include "rfmesh/errors.hpp"
#include "rfmesh/framing/crc.hpp"

namespace rfmesh::framing {

int bits_per_symbol(Modulation m)
{
    switch (m) {
    case Modulation::Qpsk: return 2;
    case Modulation::Qam16: return 4;
    }
    throw ParameterError("unknown modulation");
}

std::string_view to_string(Modulation m)
{
    return m == Modulation::Qpsk ? "QPSK" : "QAM16";
}

std::string_view to_string(DiversityMode d)
{
    return d == DiversityMode::Alamouti ? "ALAMOUTI" : "SINGLE_TX_MRC";
}

FrameGeometry frame_geometry(std::size_t payload_len, Modulation modulation, const FrameLayout& layout)
{
    const auto bps = static_cast<std::size_t>(bits_per_symbol(modulation));
    FrameGeometry g;
    g.pilot_period = static_cast<std::size_t>(layout.pilot_period);
    g.preamble_start = 0;
    g.training_a_start = static_cast<std::size_t>(layout.preamble_symbols);
    g.training_b_start = g.training_a_start + static_cast<std::size_t>(layout.training_len);
    g.header_start = g.training_b_start + static_cast<std::size_t>(layout.training_len);
    g.payload_start = g.header_start + static_cast<std::size_t>(layout.header_symbols());
    g.payload_data_symbols = payload_len * 8 / bps;
    g.pilot_count = g.payload_data_symbols / g.pilot_period;
    g.crc_start = g.payload_start + g.payload_block_symbols();
    g.crc_symbols = static_cast<std::size_t>(layout.crc_len) * 8 / bps;
    g.total_symbols = g.crc_start + g.crc_symbols;
    return g;
}

const Segment& EncodedFrame::segment(SegmentKind kind) const
{
    for (const auto& s : segments)
        if (s.kind == kind) return s;
    throw ContractError("EncodedFrame: missing segment");
}

std::span<const std::uint8_t> EncodedFrame::segment_bits(SegmentKind kind) const
{
    const auto& s = segment(kind);
    return std::span<const std::uint8_t>(bits).subspan(s.bit_offset, s.bit_count);
}

ByteVector pack_header(const FrameDescriptor& d)
{
    ByteVector h(16, 0);
    h[0] = d.version;
    h[1] = static_cast<std::uint8_t>(d.src_node);
    h[2] = static_cast<std::uint8_t>(d.dst_node);
    for (int k = 0; k < 4; ++k) h[3 + k] = static_cast<std::uint8_t>(d.seq >> (8 * k));
    h[7] = static_cast<std::uint8_t>(d.payload_len & 0xFF);
    h[8] = static_cast<std::uint8_t>(d.payload_len >> 8);
    h[9] = static_cast<std::uint8_t>(d.modulation);
    h[10] = static_cast<std::uint8_t>((d.diversity_mode == DiversityMode::SingleTxMrc ? 0x01 : 0x00)
                                      | (d.prbs_payload ? 0x02 : 0x00));
    const std::uint16_t c = crc16_ccitt(std::span<const std::uint8_t>(h).first(11));
    h[11] = static_cast<std::uint8_t>(c & 0xFF);
    h[12] = static_cast<std::uint8_t>(c >> 8);
    return h;
}

std::uint32_t payload_crc(std::span<const std::uint8_t> header_bytes, std::span<const std::uint8_t> payload)
{
    ByteVector buf(header_bytes.begin(), header_bytes.end());
    buf.insert(buf.end(), payload.begin(), payload.end());
    return crc32(buf);
}

EncodedFrame encode_frame(const FrameDescriptor& desc, std::span<const std::uint8_t> payload, const FrameLayout& layout)
{
    if (payload.size() > static_cast<std::size_t>(layout.max_payload))
        throw EncodeError("encode_frame: payload exceeds max_payload");
    if (desc.src_node < 0 || desc.src_node >= kNodeCount) throw EncodeError("encode_frame: invalid src node");
    const bool broadcast = desc.dst_node == kBroadcast;
    if (!broadcast && (desc.dst_node < 0 || desc.dst_node >= kNodeCount))
        throw EncodeError("encode_frame: invalid dst node");
    if (!broadcast && desc.dst_node == desc.src_node) throw EncodeError("encode_frame: src == dst for unicast frame");

    EncodedFrame f;
    f.descriptor = desc;
    f.descriptor.payload_len = static_cast<std::uint16_t>(payload.size());
    f.descriptor.header_crc_ok = true;
    f.descriptor.payload_crc_ok = true;
    f.header_bytes = pack_header(f.descriptor);
    f.payload.assign(payload.begin(), payload.end());
    f.crc = payload_crc(f.header_bytes, f.payload);
    f.geometry = frame_geometry(payload.size(), desc.modulation, layout);

    const auto& g = f.geometry;
    auto append = [&f](SegmentKind kind, const BitVector& bits, std::size_t sym_off, std::size_t sym_count) {
        f.segments.push_back({kind, f.bits.size(), bits.size(), sym_off, sym_count});
        f.bits.insert(f.bits.end(), bits.begin(), bits.end());
    };

    BitVector pre_bits;
    for (int chip : build_preamble()) pre_bits.push_back(chip > 0 ? 0 : 1);
    const auto training = training_sequences(kDefaultTrainingSeed, layout.training_len);
    ByteVector crc_bytes(4);
    for (int k = 0; k < 4; ++k) crc_bytes[static_cast<std::size_t>(k)] = static_cast<std::uint8_t>(f.crc >> (8 * k));

    append(SegmentKind::Preamble, pre_bits, g.preamble_start, static_cast<std::size_t>(layout.preamble_symbols));
    append(SegmentKind::TrainingA, training.bits_a, g.training_a_start, static_cast<std::size_t>(layout.training_len));
    append(SegmentKind::TrainingB, training.bits_b, g.training_b_start, static_cast<std::size_t>(layout.training_len));
    append(SegmentKind::Header, bytes_to_bits(f.header_bytes), g.header_start, static_cast<std::size_t>(layout.header_symbols()));
    append(SegmentKind::Payload, bytes_to_bits(f.payload), g.payload_start, g.payload_block_symbols());
    append(SegmentKind::Crc, bytes_to_bits(crc_bytes), g.crc_start, g.crc_symbols);
    return f;
}

FrameDescriptor decode_header(std::span<const std::uint8_t> header_bits)
{
    if (header_bits.size() != 128) throw ContractError("decode_header: expected exactly 128 bits");
    const ByteVector h = bits_to_bytes(header_bits);
    FrameDescriptor d;
    d.version = h[0];
    d.src_node = h[1];
    d.dst_node = h[2];
    d.seq = 0;
    for (int k = 0; k < 4; ++k) d.seq |= static_cast<std::uint32_t>(h[3 + k]) << (8 * k);
    d.payload_len = static_cast<std::uint16_t>(h[7] | (h[8] << 8));
    d.modulation = h[9] == 0 ? Modulation::Qpsk : Modulation::Qam16;
    d.diversity_mode = (h[10] & 0x01) ? DiversityMode::SingleTxMrc : DiversityMode::Alamouti;
    d.prbs_payload = (h[10] & 0x02) != 0;
    const std::uint16_t stored = static_cast<std::uint16_t>(h[11] | (h[12] << 8));
    d.header_crc_ok = stored == crc16_ccitt(std::span<const std::uint8_t>(h).first(11)) && h[9] <= 1;
    d.payload_crc_ok = false;
    return d;
}

DecodedFrame decode_frame(std::span<const std::uint8_t> frame_bits, const FrameLayout& layout)
{
    const std::size_t header_off = static_cast<std::size_t>(layout.preamble_symbols + 4 * layout.training_len);
    if (frame_bits.size() < header_off + 128) throw ContractError("decode_frame: truncated frame");
    DecodedFrame out;
    out.descriptor = decode_header(frame_bits.subspan(header_off, 128));
    const std::size_t payload_bits = static_cast<std::size_t>(out.descriptor.payload_len) * 8;
    const std::size_t payload_off = header_off + 128;
    if (!out.descriptor.header_crc_ok || frame_bits.size() < payload_off + payload_bits + 32) return out;

    out.payload = bits_to_bytes(frame_bits.subspan(payload_off, payload_bits));
    const ByteVector crc_bytes = bits_to_bytes(frame_bits.subspan(payload_off + payload_bits, 32));
    std::uint32_t stored = 0;
    for (int k = 0; k < 4; ++k) stored |= static_cast<std::uint32_t>(crc_bytes[static_cast<std::size_t>(k)]) << (8 * k);
    const ByteVector header = bits_to_bytes(frame_bits.subspan(header_off, 128));
    out.descriptor.payload_crc_ok = stored == payload_crc(header, out.payload);
    return out;
}

std::vector<int> build_preamble()
{
    const auto g = dsp::golay_pair(8);
    std::vector<int> chips = g.a;
    chips.insert(chips.end(), g.b.begin(), g.b.end());
    return chips;
}

std::complex<double> qpsk_point(std::uint8_t b1, std::uint8_t b0)
{
    const double s = 1.0 / std::sqrt(2.0);
    return {(b1 ? 1.0 : -1.0) * s, (b0 ? 1.0 : -1.0) * s};
}

TrainingSequences training_sequences(std::uint64_t seed, int length)
{
    std::mt19937_64 gen(seed);
    TrainingSequences t;
    auto draw = [&gen, length](std::vector<std::complex<double>>& sym, BitVector& bits) {
        for (int n = 0; n < length; ++n) {
            const auto b1 = static_cast<std::uint8_t>(gen() >> 63);
            const auto b0 = static_cast<std::uint8_t>(gen() >> 63);
            bits.push_back(b1);
            bits.push_back(b0);
            sym.push_back(qpsk_point(b1, b0));
        }
    };
    draw(t.antenna_a, t.bits_a);
    draw(t.antenna_b, t.bits_b);
    t.pilot_symbol = qpsk_point(1, 1);
    return t;
}

} // namespace rfmesh::framing
