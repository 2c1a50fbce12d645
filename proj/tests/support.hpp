#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>

#include "rfmesh/dsp/types.hpp"
#include "rfmesh/framing/bits.hpp"
#include "rfmesh/framing/frame.hpp"
#include "rfmesh/mesh/band_plan.hpp"
#include "rfmesh/modem/transmitter.hpp"

namespace support {

using cd = std::complex<double>;
using Capture = std::array<rfmesh::dsp::SampleBlockd, 2>;

inline rfmesh::framing::EncodedFrame prbs_frame(std::uint32_t seq, int len,
                                               rfmesh::framing::Modulation mod = rfmesh::framing::Modulation::Qam16,
                                               rfmesh::framing::DiversityMode div = rfmesh::framing::DiversityMode::Alamouti,
                                               int src = 0, int dst = 1)
{
    rfmesh::framing::FrameDescriptor d;
    d.src_node = src;
    d.dst_node = dst;
    d.seq = seq;
    d.payload_len = static_cast<std::uint16_t>(len);
    d.modulation = mod;
    d.diversity_mode = div;
    d.prbs_payload = true;
    return rfmesh::framing::encode_frame(d, rfmesh::framing::prbs_payload(src, dst, seq, len));
}

/// Two RX antennas receiving frames through a flat 2x2 channel H plus complex
/// Gaussian noise of variance `noise_var` per antenna. Frames start at `lead`
/// and follow each other with `gap` silent samples; `delay` shifts everything.
class CaptureBuilder {
public:
    CaptureBuilder(const rfmesh::mesh::BandPlan& plan, std::int64_t length = 0) : plan_(plan)
    {
        for (auto& b : out_) {
            b.samples = rfmesh::dsp::CVector<double>::Zero(length);
            b.sample_rate = plan.composite_rate;
        }
    }

    /// Grow with silence to at least `length` samples.
    void extend(std::int64_t length)
    {
        for (auto& b : out_) {
            const auto old = b.size();
            if (old >= length) continue;
            b.samples.conservativeResize(length);
            b.samples.tail(length - old).setZero();
        }
    }

    std::int64_t add(const rfmesh::framing::EncodedFrame& f, const rfmesh::modem::TxConfig& tx, std::int64_t at,
                     const Eigen::Matrix2cd& h = Eigen::Matrix2cd::Identity())
    {
        const auto ant = rfmesh::modem::tx_frame(f, tx, plan_, at);
        if (grow_) extend(at + ant[0].size());
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                for (Eigen::Index n = 0; n < ant[static_cast<std::size_t>(j)].size(); ++n) {
                    const auto k = at + n;
                    if (k < 0 || k >= out_[0].size()) continue;
                    out_[static_cast<std::size_t>(i)].samples[k] += h(i, j) * ant[static_cast<std::size_t>(j)].samples[n];
                }
        return at + ant[0].size();
    }

    void add_noise(double noise_var, std::uint64_t seed)
    {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> g(0.0, std::sqrt(noise_var / 2.0));
        for (auto& b : out_)
            for (Eigen::Index n = 0; n < b.size(); ++n) b.samples[n] += cd(g(rng), g(rng));
    }

    void scale(double a)
    {
        for (auto& b : out_) b.samples *= a;
    }

    const Capture& capture() const { return out_; }

    /// When off, samples past the current end are dropped instead of growing the capture.
    void set_grow(bool on) { grow_ = on; }

private:
    rfmesh::mesh::BandPlan plan_;
    Capture out_;
    bool grow_ = true;
};

/// Error vector magnitude in percent of `got` against `ref`.
inline double evm_pct(const std::vector<cd>& got, const std::vector<cd>& ref)
{
    double e = 0.0, p = 0.0;
    for (std::size_t n = 0; n < ref.size(); ++n) {
        e += std::norm(got[n] - ref[n]);
        p += std::norm(ref[n]);
    }
    return 100.0 * std::sqrt(e / p);
}

inline double db10(double x) { return 10.0 * std::log10(x); }

} // namespace support
