#include "rfmesh/modem/estimation.hpp"

#include <cmath>

#include "rfmesh/errors.hpp"

namespace rfmesh::modem {

ChannelEstimate estimate_channel(const std::array<std::span<const cd>, 2>& rx_a,
                                 const std::array<std::span<const cd>, 2>& rx_b,
                                 const framing::TrainingSequences& training)
{
    const std::array<const std::vector<cd>*, 2> ref{&training.antenna_a, &training.antenna_b};
    const std::array<const std::array<std::span<const cd>, 2>*, 2> rx{&rx_a, &rx_b};
    ChannelEstimate est;
    for (int j = 0; j < 2; ++j) {
        const auto& t = *ref[static_cast<std::size_t>(j)];
        for (int i = 0; i < 2; ++i) {
            const auto& y = (*rx[static_cast<std::size_t>(j)])[static_cast<std::size_t>(i)];
            if (y.size() != t.size()) throw ContractError("estimate_channel: training length mismatch");
            cd acc{};
            for (std::size_t n = 0; n < t.size(); ++n) acc += y[n] * std::conj(t[n]);
            est.h(i, j) = acc / static_cast<double>(t.size());
        }
    }
    est.dominant_tap_mag = est.h.cwiseAbs().maxCoeff();
    if (!(est.dominant_tap_mag >= kDegenerateTap)) throw DegenerateChannelError("estimate_channel: dominant tap below 1e-6");
    est.h /= est.dominant_tap_mag;
    return est;
}

cd mrc_symbol(const Eigen::Matrix2cd& h, int j, cd y0, cd y1)
{
    const cd h0 = h(0, j), h1 = h(1, j);
    const double norm = std::norm(h0) + std::norm(h1);
    return (std::conj(h0) * y0 + std::conj(h1) * y1) / norm;
}

std::array<cd, 2> alamouti_pair(const Eigen::Matrix2cd& h, const std::array<cd, 2>& r0, const std::array<cd, 2>& r1)
{
    // r0 = {r(0, t0), r(1, t0)}, r1 = {r(0, t1), r(1, t1)}.
    const double norm = h.squaredNorm();
    cd s1{}, s2{};
    for (int i = 0; i < 2; ++i) {
        const auto ii = static_cast<std::size_t>(i);
        s1 += std::conj(h(i, 0)) * r0[ii] + h(i, 1) * std::conj(r1[ii]);
        s2 += std::conj(h(i, 1)) * r0[ii] - h(i, 0) * std::conj(r1[ii]);
    }
    return {s1 / norm, s2 / norm};
}

CombineResult combine_mrc(std::span<const cd> y0, std::span<const cd> y1, const ChannelEstimate& est,
                          framing::DiversityMode mode)
{
    if (y0.size() != y1.size()) throw ContractError("combine_mrc: stream lengths differ");
    CombineResult out;
    out.symbols.resize(y0.size());
    if (mode == framing::DiversityMode::SingleTxMrc) {
        const double norm = std::norm(est.h(0, 0)) + std::norm(est.h(1, 0));
        if (!(norm > 0.0)) throw DegenerateChannelError("combine_mrc: zero-norm channel");
        for (std::size_t n = 0; n < y0.size(); ++n) out.symbols[n] = mrc_symbol(est.h, 0, y0[n], y1[n]);
        out.snr_gain = norm;
        return out;
    }
    const double norm = est.h.squaredNorm();
    if (!(norm > 0.0)) throw DegenerateChannelError("combine_mrc: zero-norm channel");
    if (y0.size() % 2 != 0) throw ContractError("combine_mrc: Alamouti needs an even symbol count");
    for (std::size_t n = 0; n < y0.size(); n += 2) {
        const auto s = alamouti_pair(est.h, {y0[n], y1[n]}, {y0[n + 1], y1[n + 1]});
        out.symbols[n] = s[0];
        out.symbols[n + 1] = s[1];
    }
    out.snr_gain = norm;
    return out;
}

} // namespace rfmesh::modem
