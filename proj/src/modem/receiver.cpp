#include "rfmesh/modem/receiver.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "rfmesh/errors.hpp"
#include "rfmesh/framing/crc.hpp"
#include "rfmesh/modem/constellation.hpp"

namespace rfmesh::modem {

using framing::DiversityMode;
using framing::Modulation;

cd FrameSamples::at(int antenna, std::int64_t symbol) const
{
    const std::int64_t k = start + symbol * sps - mf_start;
    const auto& v = (*mf)[static_cast<std::size_t>(antenna)];
    if (k < 0 || k >= static_cast<std::int64_t>(v.size())) return {};
    return v[static_cast<std::size_t>(k)];
}

LinkReceiver::LinkReceiver(const mesh::BandPlan& plan, int band_index, RxConfig cfg)
    : plan_(plan)
    , band_(band_index)
    , cfg_(cfg)
    , training_(framing::training_sequences(cfg.training_seed, cfg.layout.training_len))
    , preamble_(framing::build_preamble())
    , chan_{Channelizer(plan, band_index), Channelizer(plan, band_index)}
    , det_([&] {
        auto d = cfg.detector;
        d.samples_per_symbol = plan.samples_per_symbol;
        return d;
    }())
    , eq_(cfg.equalizer)
{
}

void LinkReceiver::schedule_retune(std::int64_t at_index, int band_index)
{
    for (auto& c : chan_) c.schedule_retune(at_index, band_index);
    band_ = band_index;
}

std::vector<FrameReport> LinkReceiver::process(const std::array<dsp::SampleBlockd, 2>& composite)
{
    if (composite[0].size() != composite[1].size() || composite[0].start_index != composite[1].start_index)
        throw ContractError("LinkReceiver: antenna blocks are not aligned");
    std::array<dsp::SampleBlockd, 2> mf{chan_[0].process(composite[0]), chan_[1].process(composite[1])};
    std::vector<FrameReport> reports;
    if (mf[0].empty()) return reports;
    if (!started_) {
        mf_start_ = mf_origin_ = mf[0].start_index;
        started_ = true;
    }
    for (std::size_t a = 0; a < 2; ++a) mf_[a].insert(mf_[a].end(), mf[a].view().begin(), mf[a].view().end());
    const std::span<const cd> streams[2] = {mf[0].view(), mf[1].view()};
    det_.push(std::span<const std::span<const cd>>(streams), mf[0].start_index);

    for (;;) {
        if (!pending_) {
            pending_ = det_.next();
            if (!pending_) break;
        }
        FrameReport report;
        if (try_decode(*pending_, report) == Step::NeedMore) break;
        pending_.reset();
        reports.push_back(std::move(report));
    }
    trim();
    return reports;
}

void LinkReceiver::trim()
{
    std::int64_t keep = pending_ ? pending_->sample_index : det_.earliest_pending_index();
    keep -= 2 * cfg_.layout.guard_symbols * plan_.samples_per_symbol;
    const std::int64_t drop = keep - mf_start_;
    // Erase in large chunks only.
    if (drop < (1 << 16)) return;
    for (auto& v : mf_) v.erase(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(drop));
    mf_start_ += drop;
}

LinkReceiver::Step LinkReceiver::try_decode(const DetectionResult& det, FrameReport& report)
{
    const int sps = plan_.samples_per_symbol;
    const auto& layout = cfg_.layout;
    const std::int64_t mf_end = mf_start_ + static_cast<std::int64_t>(mf_[0].size());
    const FrameSamples fs{det.sample_index, sps, &mf_, mf_start_};
    const auto hdr_geom = framing::frame_geometry(0, Modulation::Qpsk, layout);
    const std::int64_t header_end = static_cast<std::int64_t>(hdr_geom.payload_start);
    if (det.sample_index + header_end * sps > mf_end) return Step::NeedMore;

    report.detection = det;
    report.end_index = det.sample_index + header_end * sps;

    // Channel estimate from the two dedicated training intervals.
    const std::size_t tl = static_cast<std::size_t>(layout.training_len);
    std::array<std::vector<cd>, 2> ya, yb;
    for (int i = 0; i < 2; ++i) {
        for (std::size_t n = 0; n < tl; ++n) {
            ya[static_cast<std::size_t>(i)].push_back(fs.at(i, static_cast<std::int64_t>(hdr_geom.training_a_start + n)));
            yb[static_cast<std::size_t>(i)].push_back(fs.at(i, static_cast<std::int64_t>(hdr_geom.training_b_start + n)));
        }
    }
    ChannelEstimate est;
    try {
        est = estimate_channel({ya[0], ya[1]}, {yb[0], yb[1]}, training_);
    } catch (const DegenerateChannelError&) {
        report.outcome = FrameOutcome::Degenerate;
        return Step::Done;
    }
    est.timestamp = det.sample_index + static_cast<std::int64_t>(hdr_geom.training_a_start) * sps;
    report.channel = est;
    const double scale = 1.0 / est.dominant_tap_mag;
    const Eigen::Matrix2cd& h = est.h;

    // Header: column-0 MRC, QPSK.
    std::vector<cd> hdr_sym;
    for (std::size_t s = hdr_geom.header_start; s < hdr_geom.payload_start; ++s) {
        const auto k = static_cast<std::int64_t>(s);
        hdr_sym.push_back(mrc_symbol(h, 0, fs.at(0, k) * scale, fs.at(1, k) * scale));
    }
    const framing::BitVector hdr_bits = demap_qpsk(hdr_sym);
    framing::FrameDescriptor desc = framing::decode_header(hdr_bits);
    if (!desc.header_crc_ok || desc.payload_len > layout.max_payload) {
        report.outcome = FrameOutcome::HeaderFailed;
        return Step::Done;
    }

    const auto g = framing::frame_geometry(desc.payload_len, desc.modulation, layout);
    const std::int64_t total = static_cast<std::int64_t>(g.total_symbols);
    const int delay = eq_.config().delay();
    det_.hold_until(det.sample_index + total * sps);
    if (det.sample_index + (total + delay) * sps > mf_end) return Step::NeedMore;
    report.end_index = det.sample_index + total * sps;

    // Pass 1: phase-corrected combining at every symbol position.
    const std::int64_t k0 = static_cast<std::int64_t>(g.training_a_start) - 2 * delay;
    const std::int64_t k1 = total + delay;
    std::vector<cd> z(static_cast<std::size_t>(k1 - k0));
    std::vector<std::int64_t> data_pos;
    data_pos.reserve(g.payload_data_symbols + g.crc_symbols);
    for (std::int64_t s = static_cast<std::int64_t>(g.payload_start); s < total; ++s)
        if (!g.is_pilot(static_cast<std::size_t>(s))) data_pos.push_back(s);
    std::vector<std::int64_t> pair_partner(static_cast<std::size_t>(k1 - k0), -1);
    if (desc.diversity_mode == DiversityMode::Alamouti)
        for (std::size_t m = 0; m + 1 < data_pos.size(); m += 2) pair_partner[static_cast<std::size_t>(data_pos[m] - k0)] = data_pos[m + 1];

    double phase = 0.0;
    auto rx = [&](int i, std::int64_t k) { return fs.at(i, k) * scale * std::polar(1.0, -phase); };
    const auto ta = static_cast<std::int64_t>(g.training_a_start);
    const auto tb = static_cast<std::int64_t>(g.training_b_start);
    const auto hs = static_cast<std::int64_t>(g.header_start);
    const auto ps = static_cast<std::int64_t>(g.payload_start);
    for (std::int64_t k = k0; k < k1; ++k) {
        cd& out = z[static_cast<std::size_t>(k - k0)];
        if (k >= tb && k < hs) {
            out = mrc_symbol(h, 1, rx(0, k), rx(1, k));
        } else if (k >= ps && k < total && !g.is_pilot(static_cast<std::size_t>(k))) {
            if (desc.diversity_mode == DiversityMode::SingleTxMrc) {
                out = mrc_symbol(h, 0, rx(0, k), rx(1, k));
            } else {
                const std::int64_t partner = pair_partner[static_cast<std::size_t>(k - k0)];
                if (partner >= 0) {
                    const auto s = alamouti_pair(h, {rx(0, k), rx(1, k)}, {rx(0, partner), rx(1, partner)});
                    out = s[0];
                    z[static_cast<std::size_t>(partner - k0)] = s[1];
                }
            }
        } else {
            out = mrc_symbol(h, 0, rx(0, k), rx(1, k));
            if (g.is_pilot(static_cast<std::size_t>(k))) phase += cfg_.phase_gain * std::arg(out * std::conj(training_.pilot_symbol));
        }
    }

    // Pass 2: equalizer with known / decision / no references.
    struct Ref {
        ReferenceKind kind;
        cd value;
        Modulation mod;
    };
    auto reference = [&](std::int64_t s) -> Ref {
        if (s < ta) return {ReferenceKind::Known, cd(static_cast<double>(preamble_[static_cast<std::size_t>(s)]), 0.0), Modulation::Qpsk};
        if (s < tb) return {ReferenceKind::Known, training_.antenna_a[static_cast<std::size_t>(s - ta)], Modulation::Qpsk};
        if (s < hs) return {ReferenceKind::Known, training_.antenna_b[static_cast<std::size_t>(s - tb)], Modulation::Qpsk};
        if (s < ps) return {ReferenceKind::Decision, {}, Modulation::Qpsk};
        if (s >= total) return {ReferenceKind::None, {}, Modulation::Qpsk};
        if (g.is_pilot(static_cast<std::size_t>(s))) return {ReferenceKind::Known, training_.pilot_symbol, Modulation::Qpsk};
        return {ReferenceKind::Decision, {}, desc.modulation};
    };
    std::vector<cd> eq_out(static_cast<std::size_t>(total - ta));
    for (std::int64_t k = k0; k < k1; ++k) {
        const cd y = eq_.filter(z[static_cast<std::size_t>(k - k0)]);
        const std::int64_t s = k - delay;
        if (s < ta - delay) continue;   // regressor still holds the previous frame
        const Ref r = reference(s);
        if (r.kind == ReferenceKind::Known) eq_.adapt(y, r.value);
        else if (r.kind == ReferenceKind::Decision) eq_.adapt(y, slice(y, r.mod));
        if (s >= ta && s < total) eq_out[static_cast<std::size_t>(s - ta)] = y;
    }

    // EVM over training B and pilots.
    auto evm_add = [&](std::int64_t s, cd ref) {
        report.evm_ref_power += std::norm(ref);
        report.evm_pre_error += std::norm(z[static_cast<std::size_t>(s - k0)] - ref);
        report.evm_post_error += std::norm(eq_out[static_cast<std::size_t>(s - ta)] - ref);
    };
    for (std::int64_t s = tb; s < hs; ++s) evm_add(s, training_.antenna_b[static_cast<std::size_t>(s - tb)]);
    for (std::int64_t s = ps; s < total; ++s)
        if (g.is_pilot(static_cast<std::size_t>(s))) evm_add(s, training_.pilot_symbol);

    // Demap payload and CRC.
    std::vector<cd> data(data_pos.size());
    for (std::size_t m = 0; m < data_pos.size(); ++m) data[m] = eq_out[static_cast<std::size_t>(data_pos[m] - ta)];
    const framing::BitVector bits = demap_symbols(data, desc.modulation);
    const std::size_t payload_bits = static_cast<std::size_t>(desc.payload_len) * 8;
    const auto bit_span = std::span<const std::uint8_t>(bits);
    report.payload = framing::bits_to_bytes(bit_span.first(payload_bits));
    const framing::ByteVector crc_bytes = framing::bits_to_bytes(bit_span.subspan(payload_bits, 32));
    std::uint32_t rx_crc = 0;
    for (int b = 0; b < 4; ++b) rx_crc |= static_cast<std::uint32_t>(crc_bytes[static_cast<std::size_t>(b)]) << (8 * b);
    const framing::ByteVector header_bytes = framing::bits_to_bytes(hdr_bits);
    desc.payload_crc_ok = framing::payload_crc(header_bytes, report.payload) == rx_crc;
    report.descriptor = desc;
    report.outcome = FrameOutcome::Decoded;

    if (desc.prbs_payload) {
        const auto expect = framing::prbs_payload(desc.src_node, desc.dst_node, desc.seq, desc.payload_len);
        std::uint64_t errors = 0;
        for (std::size_t b = 0; b < expect.size(); ++b)
            errors += static_cast<std::uint64_t>(std::popcount(static_cast<unsigned>(expect[b] ^ report.payload[b])));
        report.ber_valid = true;
        report.bit_errors = errors;
        report.payload_bits = payload_bits;
    }

    // Gated powers: on = training A through CRC, off = the guard before the preamble.
    const std::int64_t on_lo = det.sample_index + ta * sps;
    const std::int64_t on_hi = det.sample_index + total * sps;
    const std::int64_t off_hi = det.sample_index - cfg_.gate_margin;
    const std::int64_t off_lo = det.sample_index - static_cast<std::int64_t>(layout.guard_symbols) * sps + cfg_.gate_margin;
    if (off_lo >= mf_origin_ && off_lo >= mf_start_ && off_hi > off_lo) {
        for (std::size_t i = 0; i < 2; ++i) {
            double on = 0.0, off = 0.0;
            for (std::int64_t n = on_lo; n < on_hi; ++n) on += std::norm(mf_[i][static_cast<std::size_t>(n - mf_start_)]);
            for (std::int64_t n = off_lo; n <= off_hi; ++n) off += std::norm(mf_[i][static_cast<std::size_t>(n - mf_start_)]);
            report.gate_on[i] = on / static_cast<double>(on_hi - on_lo);
            report.gate_off[i] = off / static_cast<double>(off_hi - off_lo + 1);
        }
        report.sinr_available = true;
    }

    const std::size_t stride = std::max<std::size_t>(1, data.size() / static_cast<std::size_t>(std::max(1, cfg_.scatter_points)));
    for (std::size_t m = 0; m < data.size() && report.scatter.size() < static_cast<std::size_t>(cfg_.scatter_points); m += stride)
        report.scatter.push_back(data[m]);
    return Step::Done;
}

std::vector<FrameReport> receive_capture(const std::array<dsp::SampleBlockd, 2>& composite, const mesh::BandPlan& plan,
                                         int band_index, const RxConfig& cfg)
{
    LinkReceiver rx(plan, band_index, cfg);
    auto reports = rx.process(composite);
    // Flush with silence so the last frame's tail clears every filter.
    std::array<dsp::SampleBlockd, 2> pad;
    for (std::size_t a = 0; a < 2; ++a) {
        pad[a].samples = dsp::CVector<double>::Zero(16384);
        pad[a].sample_rate = composite[a].sample_rate;
        pad[a].start_index = composite[a].end_index();
    }
    auto more = rx.process(pad);
    reports.insert(reports.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
    return reports;
}

} // namespace rfmesh::modem
