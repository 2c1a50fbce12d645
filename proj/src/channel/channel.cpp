#include "rfmesh/channel/channel.hpp"

#include <cmath>
#include <numbers>

#include "rfmesh/errors.hpp"
#include "rfmesh/modem/channelizer.hpp"

namespace rfmesh::channel {

std::string_view to_string(Profile p)
{
    switch (p) {
    case Profile::Ideal: return "IDEAL";
    case Profile::AwgnOnly: return "AWGN_ONLY";
    case Profile::MultipathLight: return "MULTIPATH_LIGHT";
    case Profile::Mobile: return "MOBILE";
    }
    return "?";
}

Profile profile_from_string(std::string_view s)
{
    for (auto p : {Profile::Ideal, Profile::AwgnOnly, Profile::MultipathLight, Profile::Mobile})
        if (s == to_string(p)) return p;
    throw ParameterError("unknown channel profile '" + std::string(s) + "'");
}

RngStream::RngStream(std::uint64_t seed, StreamKind kind, int node)
    : seed_(seed)
    , kind_(kind)
    , node_(node)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(kind), static_cast<std::uint32_t>(node)};
    eng_.seed(seq);
}

namespace {

cd complex_gaussian(std::mt19937_64& eng, double variance)
{
    std::normal_distribution<double> n(0.0, std::sqrt(variance / 2.0));
    const double re = n(eng);
    const double im = n(eng);
    return {re, im};
}

} // namespace

ChannelRealization make_realization(Profile profile, double snr_db, std::uint64_t seed, const mesh::BandPlan& plan)
{
    ChannelRealization r;
    r.profile = profile;
    const double noise = profile == Profile::Ideal ? 0.0 : modem::noise_power_for_snr(plan, snr_db);
    r.noise_power.fill(noise);
    for (int src = 0; src < kNodes; ++src) {
        RngStream fading(seed, StreamKind::Fading, src);
        auto& eng = fading.engine();
        for (int dst = 0; dst < kNodes; ++dst) {
            if (src == dst) continue;
            auto& p = r.path(src, dst);
            if (profile == Profile::Ideal || profile == Profile::AwgnOnly) {
                for (int i = 0; i < 2; ++i)
                    for (int j = 0; j < 2; ++j) p.taps[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = {i == j ? 1.0 : 0.0};
                p.tap_rotation.assign(1, 0.0);
            } else {
                for (auto& row : p.taps)
                    for (auto& t : row) {
                        t.resize(kMultipathProfileDb.size());
                        for (std::size_t l = 0; l < t.size(); ++l)
                            t[l] = complex_gaussian(eng, std::pow(10.0, kMultipathProfileDb[l] / 10.0));
                    }
                std::uniform_int_distribution<int> d(0, kMaxDelaySamples);
                p.delay_samples = d(eng);
                p.tap_rotation.assign(kMultipathProfileDb.size(), 0.0);
                if (profile == Profile::Mobile) {
                    std::uniform_real_distribution<double> u(-1.0, 1.0);
                    p.cfo_normalized = u(eng) * kMobileMaxCfoPerSymbol / plan.composite_oversampling;
                    for (auto& rot : p.tap_rotation) rot = u(eng) * kMobileTapRotation;
                }
            }
        }
    }
    return r;
}

void set_link_snr(ChannelRealization& r, int src, int dst, double snr_db, double base_snr_db)
{
    if (src < 0 || src >= kNodes || dst < 0 || dst >= kNodes || src == dst)
        throw ParameterError("set_link_snr: invalid link");
    r.path(src, dst).amplitude = std::pow(10.0, (snr_db - base_snr_db) / 20.0);
}

Medium::Medium(ChannelRealization realization, std::uint64_t seed)
    : real_(std::move(realization))
    , noise_rng_{RngStream(seed, StreamKind::Noise, 0), RngStream(seed, StreamKind::Noise, 1),
                 RngStream(seed, StreamKind::Noise, 2), RngStream(seed, StreamKind::Noise, 3)}
{
    set_realization(real_);
}

void Medium::set_realization(ChannelRealization r)
{
    int need = 0;
    for (int s = 0; s < kNodes; ++s)
        for (int d = 0; d < kNodes; ++d) {
            if (s == d) continue;
            const auto& p = r.path(s, d);
            if (p.delay_samples < 0) throw ParameterError("Medium: negative delay");
            for (const auto& row : p.taps)
                for (const auto& t : row) {
                    if (t.empty()) throw ParameterError("Medium: empty tap vector");
                    need = std::max(need, p.delay_samples + static_cast<int>(t.size()) - 1);
                }
        }
    for (double n : r.noise_power)
        if (!(n >= 0.0)) throw ParameterError("Medium: negative noise power");
    if (need > hist_len_) {
        for (auto& node : history_)
            for (auto& h : node) h.insert(h.begin(), static_cast<std::size_t>(need - hist_len_), cd{});
        hist_len_ = need;
    }
    real_ = std::move(r);
}

std::array<dsp::SampleBlockd, 2> Medium::receive(const NodeWaveforms& tx, int dst)
{
    const Eigen::Index len = tx[0][0].size();
    const std::int64_t start = tx[0][0].start_index;
    for (const auto& node : tx)
        for (const auto& b : node)
            if (b.size() != len || b.start_index != start) throw ContractError("Medium: TX blocks are not aligned");
    if (started_ && start != next_index_) throw ContractError("Medium: non-contiguous block");

    std::array<dsp::SampleBlockd, 2> out;
    for (auto& b : out) {
        b.samples = dsp::CVector<double>::Zero(len);
        b.sample_rate = tx[0][0].sample_rate;
        b.start_index = start;
    }
    std::vector<cd> ext;
    std::vector<cd> acc(static_cast<std::size_t>(len));
    for (int src = 0; src < kNodes; ++src) {
        if (src == dst) continue;
        const auto& p = real_.path(src, dst);
        for (int i = 0; i < 2; ++i) {
            std::fill(acc.begin(), acc.end(), cd{});
            bool any = false;
            for (int j = 0; j < 2; ++j) {
                const auto& taps = p.taps[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
                bool nonzero = false;
                for (const cd& t : taps) nonzero |= t != cd{};
                if (!nonzero) continue;
                any = true;
                const auto& hist = history_[static_cast<std::size_t>(src)][static_cast<std::size_t>(j)];
                const auto& blk = tx[static_cast<std::size_t>(src)][static_cast<std::size_t>(j)].samples;
                ext.assign(hist.begin(), hist.end());
                ext.insert(ext.end(), blk.data(), blk.data() + len);
                for (std::size_t l = 0; l < taps.size(); ++l) {
                    const double rot = l < p.tap_rotation.size() ? p.tap_rotation[l] : 0.0;
                    const std::int64_t base = hist_len_ - p.delay_samples - static_cast<std::int64_t>(l);
                    if (rot == 0.0) {
                        const cd t = taps[l] * p.amplitude;
                        for (Eigen::Index n = 0; n < len; ++n) acc[static_cast<std::size_t>(n)] += t * ext[static_cast<std::size_t>(base + n)];
                    } else {
                        cd ph = taps[l] * p.amplitude * std::polar(1.0, 2.0 * std::numbers::pi * rot * static_cast<double>(start));
                        const cd step = std::polar(1.0, 2.0 * std::numbers::pi * rot);
                        for (Eigen::Index n = 0; n < len; ++n) {
                            acc[static_cast<std::size_t>(n)] += ph * ext[static_cast<std::size_t>(base + n)];
                            ph *= step;
                        }
                    }
                }
            }
            if (!any) continue;
            auto& o = out[static_cast<std::size_t>(i)].samples;
            if (p.cfo_normalized == 0.0) {
                for (Eigen::Index n = 0; n < len; ++n) o[n] += acc[static_cast<std::size_t>(n)];
            } else {
                cd ph = std::polar(1.0, 2.0 * std::numbers::pi * p.cfo_normalized * static_cast<double>(start));
                const cd step = std::polar(1.0, 2.0 * std::numbers::pi * p.cfo_normalized);
                for (Eigen::Index n = 0; n < len; ++n) {
                    o[n] += ph * acc[static_cast<std::size_t>(n)];
                    ph *= step;
                }
            }
        }
    }
    const double np = real_.noise_power[static_cast<std::size_t>(dst)];
    if (noise_on_ && np > 0.0) {
        auto& eng = noise_rng_[static_cast<std::size_t>(dst)].engine();
        std::normal_distribution<double> n(0.0, std::sqrt(np / 2.0));
        // Draws interleave antennas per sample so block boundaries do not matter.
        for (Eigen::Index k = 0; k < len; ++k)
            for (auto& b : out) {
                const double re = n(eng);
                const double im = n(eng);
                b.samples[k] += cd(re, im);
            }
    }
    return out;
}

void Medium::commit(const NodeWaveforms& tx)
{
    const Eigen::Index len = tx[0][0].size();
    const auto h = static_cast<std::size_t>(hist_len_);
    for (int s = 0; s < kNodes; ++s)
        for (int a = 0; a < 2; ++a) {
            auto& hist = history_[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)];
            const auto& blk = tx[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)].samples;
            hist.insert(hist.end(), blk.data(), blk.data() + len);
            hist.erase(hist.begin(), hist.end() - static_cast<std::ptrdiff_t>(h));
        }
    next_index_ = tx[0][0].start_index + len;
    started_ = true;
}

NodeWaveforms Medium::propagate(const NodeWaveforms& tx)
{
    NodeWaveforms out;
    for (int d = 0; d < kNodes; ++d) out[static_cast<std::size_t>(d)] = receive(tx, d);
    commit(tx);
    return out;
}

NodeWaveforms propagate(const NodeWaveforms& tx, const ChannelRealization& realization, std::uint64_t seed)
{
    Medium m(realization, seed);
    return m.propagate(tx);
}

} // namespace rfmesh::channel
