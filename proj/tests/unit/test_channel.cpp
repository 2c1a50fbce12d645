#include <doctest.h>

#include <bit>
#include <random>
#include <set>

#include <unsupported/Eigen/FFT>

#include "../support.hpp"
#include "rfmesh/channel/channel.hpp"
#include "rfmesh/errors.hpp"
#include "rfmesh/modem/channelizer.hpp"

using namespace rfmesh;
using namespace rfmesh::channel;

namespace {

const mesh::BandPlan& plan()
{
    static const mesh::BandPlan p = mesh::build_band_plan(1.0);
    return p;
}

NodeWaveforms silent(Eigen::Index len, std::int64_t start = 0)
{
    NodeWaveforms w;
    for (auto& node : w)
        for (auto& b : node) {
            b.samples = dsp::CVector<double>::Zero(len);
            b.sample_rate = 8.0;
            b.start_index = start;
        }
    return w;
}

void fill_random(dsp::SampleBlockd& b, std::mt19937_64& rng)
{
    std::normal_distribution<double> g;
    for (Eigen::Index n = 0; n < b.size(); ++n) b.samples[n] = cd(g(rng), g(rng));
}

NodeWaveforms slice(const NodeWaveforms& w, Eigen::Index from, Eigen::Index len)
{
    NodeWaveforms out;
    for (std::size_t k = 0; k < w.size(); ++k)
        for (std::size_t a = 0; a < 2; ++a) {
            out[k][a].samples = w[k][a].samples.segment(from, len);
            out[k][a].sample_rate = w[k][a].sample_rate;
            out[k][a].start_index = w[k][a].start_index + from;
        }
    return out;
}

} // namespace

TEST_SUITE("channel") {

TEST_CASE("ideal channel passes a single transmitter through exactly")
{
    std::mt19937_64 rng(1);
    auto tx = silent(5000);
    fill_random(tx[0][0], rng);
    fill_random(tx[0][1], rng);
    const auto rx = propagate(tx, make_realization(Profile::Ideal, 28.0, 1, plan()), 1);
    for (int dst = 1; dst < 4; ++dst)
        for (std::size_t a = 0; a < 2; ++a) CHECK(rx[static_cast<std::size_t>(dst)][a].samples == tx[0][a].samples);
    // No self-reception.
    CHECK(rx[0][0].samples.cwiseAbs().maxCoeff() == 0.0);
    CHECK(rx[0][1].samples.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("noise-only power matches the realization")
{
    const auto real = make_realization(Profile::AwgnOnly, 20.0, 2, plan());
    const auto rx = propagate(silent(1000000), real, 2);
    for (int dst = 0; dst < 4; ++dst)
        for (std::size_t a = 0; a < 2; ++a) {
            const double p = rx[static_cast<std::size_t>(dst)][a].samples.squaredNorm() / 1e6;
            CHECK(p == doctest::Approx(real.noise_power[static_cast<std::size_t>(dst)]).epsilon(0.01));
        }
    CHECK(real.noise_power[0] == doctest::Approx(modem::noise_power_for_snr(plan(), 20.0)));
}

TEST_CASE("multipath tap powers follow the profile")
{
    std::array<double, 3> acc{};
    std::size_t count = 0;
    int max_delay = 0;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        const auto r = make_realization(Profile::MultipathLight, 25.0, seed, plan());
        const auto& p = r.path(static_cast<int>(seed % 4), static_cast<int>((seed + 1) % 4));
        for (const auto& row : p.taps)
            for (const auto& t : row) {
                REQUIRE(t.size() == 3);
                for (std::size_t l = 0; l < 3; ++l) acc[l] += std::norm(t[l]);
                ++count;
            }
        CHECK(p.delay_samples >= 0);
        CHECK(p.delay_samples <= kMaxDelaySamples);
        max_delay = std::max(max_delay, p.delay_samples);
        CHECK(p.cfo_normalized == 0.0);
    }
    for (std::size_t l = 0; l < 3; ++l)
        CHECK(std::abs(support::db10(acc[l] / static_cast<double>(count)) - kMultipathProfileDb[l]) <= 0.5);
    CHECK(max_delay > 0);
}

TEST_CASE("mobile profile stays within its drift bounds")
{
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto r = make_realization(Profile::Mobile, 25.0, seed, plan());
        for (int s = 0; s < 4; ++s)
            for (int d = 0; d < 4; ++d) {
                if (s == d) continue;
                const auto& p = r.path(s, d);
                CHECK(std::abs(p.cfo_normalized) <= kMobileMaxCfoPerSymbol / 8.0);
                for (double rot : p.tap_rotation) CHECK(std::abs(rot) <= kMobileTapRotation);
            }
    }
}

TEST_CASE("propagation is linear with noise disabled")
{
    std::mt19937_64 rng(3);
    const auto real = make_realization(Profile::Mobile, 20.0, 3, plan());
    auto a = silent(4000), b = silent(4000), ab = silent(4000);
    for (std::size_t k = 0; k < 4; ++k)
        for (std::size_t j = 0; j < 2; ++j) {
            fill_random(a[k][j], rng);
            fill_random(b[k][j], rng);
            ab[k][j].samples = a[k][j].samples + b[k][j].samples;
        }
    auto run = [&](const NodeWaveforms& w) {
        Medium m(real, 3);
        m.set_noise_enabled(false);
        return m.propagate(w);
    };
    const auto ra = run(a), rb = run(b), rab = run(ab);
    double worst = 0.0;
    for (std::size_t k = 0; k < 4; ++k)
        for (std::size_t i = 0; i < 2; ++i)
            worst = std::max(worst, (rab[k][i].samples - ra[k][i].samples - rb[k][i].samples).cwiseAbs().maxCoeff());
    CHECK(worst < 1e-12);
}

TEST_CASE("block-wise propagation matches one-shot propagation")
{
    std::mt19937_64 rng(4);
    const auto real = make_realization(Profile::MultipathLight, 20.0, 4, plan());
    auto w = silent(6000);
    for (auto& node : w)
        for (auto& b : node) fill_random(b, rng);
    const auto whole = propagate(w, real, 9);
    Medium m(real, 9);
    const auto first = m.propagate(slice(w, 0, 2500));
    const auto second = m.propagate(slice(w, 2500, 3500));
    for (std::size_t k = 0; k < 4; ++k)
        for (std::size_t i = 0; i < 2; ++i) {
            CHECK(first[k][i].samples == whole[k][i].samples.head(2500));
            CHECK(second[k][i].samples == whole[k][i].samples.tail(3500));
            CHECK(second[k][i].start_index == 2500);
        }
    CHECK_THROWS_AS(m.propagate(slice(w, 0, 100)), ContractError);
}

TEST_CASE("misaligned blocks are a contract error")
{
    auto w = silent(100);
    w[2][1].start_index = 5;
    CHECK_THROWS_AS(propagate(w, make_realization(Profile::Ideal, 0.0, 0, plan()), 0), ContractError);
    auto v = silent(100);
    v[1][0].samples.resize(99);
    CHECK_THROWS_AS(propagate(v, make_realization(Profile::Ideal, 0.0, 0, plan()), 0), ContractError);
}

TEST_CASE("same seed gives identical output, a new seed does not")
{
    std::mt19937_64 rng(5);
    auto w = silent(3000);
    fill_random(w[1][0], rng);
    const auto r1 = make_realization(Profile::Mobile, 15.0, 42, plan());
    const auto r2 = make_realization(Profile::Mobile, 15.0, 42, plan());
    const auto a = propagate(w, r1, 42);
    const auto b = propagate(w, r2, 42);
    const auto c = propagate(w, make_realization(Profile::Mobile, 15.0, 43, plan()), 43);
    for (std::size_t k = 0; k < 4; ++k)
        for (std::size_t i = 0; i < 2; ++i) {
            CHECK(a[k][i].samples == b[k][i].samples);
            CHECK(a[k][i].samples != c[k][i].samples);
        }
}

TEST_CASE("rng streams are independent per kind and node")
{
    std::set<std::uint64_t> firsts;
    for (auto kind : {StreamKind::Noise, StreamKind::Fading, StreamKind::Payload})
        for (int node = 0; node < 4; ++node) {
            RngStream s(7, kind, node);
            firsts.insert(s.engine()());
            CHECK(s.seed() == 7);
            CHECK(s.kind() == kind);
            CHECK(s.node() == node);
        }
    CHECK(firsts.size() == 12);
    RngStream a(7, StreamKind::Noise, 1), b(7, StreamKind::Noise, 1);
    CHECK(a.engine()() == b.engine()());
}

TEST_CASE("per-link snr override scales one path")
{
    auto r = make_realization(Profile::AwgnOnly, 28.0, 1, plan());
    set_link_snr(r, 2, 3, 22.0, 28.0);
    CHECK(r.path(2, 3).amplitude == doctest::Approx(std::pow(10.0, -6.0 / 20.0)));
    CHECK(r.path(3, 2).amplitude == 1.0);
    CHECK_THROWS_AS(set_link_snr(r, 1, 1, 20.0, 28.0), ParameterError);
    CHECK_THROWS_AS(set_link_snr(r, 0, 4, 20.0, 28.0), ParameterError);
}

TEST_CASE("profile names")
{
    for (auto p : {Profile::Ideal, Profile::AwgnOnly, Profile::MultipathLight, Profile::Mobile})
        CHECK(profile_from_string(to_string(p)) == p);
    CHECK_THROWS_AS(profile_from_string("RAYLEIGH"), ParameterError);
}

TEST_CASE("band-limited transmitters in different bands stay isolated")
{
    // Noise confined to +-0.75 Rs of each band center.
    const std::size_t n = 1 << 16;
    auto band_noise = [&](int band, std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> g;
        std::vector<cd> spec(n);
        const double fc = plan().center_normalized(band);
        for (std::size_t k = 0; k < n; ++k) {
            double d = static_cast<double>(k) / static_cast<double>(n) - fc;
            d -= std::round(d);
            if (std::abs(d) <= 0.75 / 8.0) spec[k] = cd(g(rng), g(rng));
        }
        std::vector<cd> x;
        Eigen::FFT<double> fft;
        fft.inv(x, spec);
        dsp::SampleBlockd b;
        b.samples = Eigen::Map<const dsp::CVector<double>>(x.data(), static_cast<Eigen::Index>(n));
        b.sample_rate = 8.0;
        return b;
    };
    auto w = silent(static_cast<Eigen::Index>(n));
    w[0][0] = band_noise(1, 1);
    w[2][0] = band_noise(2, 2);
    auto only = [&](std::size_t keep) {
        auto v = w;
        for (std::size_t k = 0; k < 4; ++k)
            if (k != keep) v[k][0].samples.setZero();
        return propagate(v, make_realization(Profile::Ideal, 0.0, 0, plan()), 0)[1][0];
    };
    auto power = [](const dsp::SampleBlockd& b) { return b.samples.segment(4096, 50000).squaredNorm(); };
    const auto rx0 = only(0), rx2 = only(2);
    const auto both = propagate(w, make_realization(Profile::Ideal, 0.0, 0, plan()), 0)[1][0];
    const double own1 = power(modem::channelize(rx0, 1, plan()));
    const double own2 = power(modem::channelize(rx2, 2, plan()));
    CHECK(support::db10(power(modem::channelize(rx2, 1, plan())) / own1) <= -80.0);
    CHECK(support::db10(power(modem::channelize(rx0, 2, plan())) / own2) <= -80.0);
    CHECK(power(modem::channelize(both, 1, plan())) == doctest::Approx(own1).epsilon(1e-3));
}

TEST_CASE("shaped frames in adjacent bands: leakage is the transmit filter's own tail")
{
    // The 65-tap SRRC has spectral sidelobes inside the neighbouring band; the
    // receive cascade cannot remove those, so the bound here is the tail energy.
    const auto f = support::prbs_frame(1, 2000, framing::Modulation::Qam16, framing::DiversityMode::SingleTxMrc);
    modem::TxConfig cfg;
    cfg.band_index = 1;
    cfg.diversity_mode = framing::DiversityMode::SingleTxMrc;
    const auto out = modem::tx_frame(f, cfg, plan(), 0);
    std::vector<cd> x(out[0].samples.data(), out[0].samples.data() + out[0].size());
    x.resize(std::bit_ceil(x.size()));
    std::vector<cd> spec;
    Eigen::FFT<double> fft;
    fft.fwd(spec, x);
    double total = 0.0, tail = 0.0;
    const double f2 = plan().center_normalized(2);
    for (std::size_t k = 0; k < spec.size(); ++k) {
        double d = static_cast<double>(k) / static_cast<double>(spec.size()) - f2;
        d -= std::round(d);
        total += std::norm(spec[k]);
        if (std::abs(d) <= 0.75 / 8.0) tail += std::norm(spec[k]);
    }
    const auto y1 = modem::channelize(out[0], 1, plan());
    const auto y2 = modem::channelize(out[0], 2, plan());
    const double leak = y2.samples.squaredNorm() / y1.samples.squaredNorm();
    CHECK(support::db10(leak) <= -50.0);
    CHECK(support::db10(leak) <= support::db10(tail / total) + 1.0);
}

} // TEST_SUITE
