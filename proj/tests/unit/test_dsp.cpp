#include <doctest.h>

#include <numbers>
#include <random>

#include "../oracles.hpp"
#include "rfmesh/dsp/filter_design.hpp"
#include "rfmesh/dsp/fir.hpp"
#include "rfmesh/dsp/golay.hpp"
#include "rfmesh/dsp/nco.hpp"
#include "rfmesh/dsp/resample.hpp"
#include "rfmesh/errors.hpp"

using namespace rfmesh;
using dsp::cd;

namespace {

dsp::SampleBlockd noise_block(std::size_t n, unsigned seed, std::int64_t start = 0)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    dsp::SampleBlockd b;
    b.samples.resize(static_cast<Eigen::Index>(n));
    for (auto& x : b.samples) x = cd(g(rng), g(rng));
    b.start_index = start;
    return b;
}

std::vector<double> to_std(const dsp::RVector<double>& v)
{
    return {v.data(), v.data() + v.size()};
}

dsp::SampleBlockd slice(const dsp::SampleBlockd& b, Eigen::Index off, Eigen::Index len)
{
    dsp::SampleBlockd s;
    s.samples = b.samples.segment(off, len);
    s.start_index = b.start_index + off;
    s.sample_rate = b.sample_rate;
    return s;
}

} // namespace

TEST_SUITE("dsp") {

TEST_CASE("srrc has 65 taps, unit energy and exact symmetry")
{
    const auto h = dsp::design_srrc(0.5, 8, 8);
    CHECK(h.size() == 65);
    CHECK(std::abs(h.taps.squaredNorm() - 1.0) <= 1e-12);
    CHECK(dsp::is_symmetric(h.taps));
    for (double beta : {0.1, 0.25, 0.35, 0.5, 1.0})
        for (int sps : {2, 4, 8}) {
            const auto g = dsp::design_srrc(beta, 6, sps);
            CHECK(g.size() == 6 * sps + 1);
            CHECK(std::abs(g.taps.squaredNorm() - 1.0) <= 1e-12);
            CHECK(g.taps.allFinite());
        }
}

TEST_CASE("srrc matched cascade meets the Nyquist criterion")
{
    const auto h = to_std(dsp::design_srrc(0.5, 8, 8).taps);
    const auto rc = oracle::convolve(h, h);
    const std::size_t c = rc.size() / 2;
    CHECK(std::abs(rc[c] - 1.0) < 1e-12);
    for (std::size_t k = 1; 8 * k <= c; ++k) {
        CHECK(std::abs(rc[c + 8 * k]) <= 1e-3);
        CHECK(std::abs(rc[c - 8 * k]) <= 1e-3);
    }
    // The truncated cascade tracks the analytic raised cosine near the center.
    for (int n = -16; n <= 16; ++n)
        CHECK(std::abs(rc[static_cast<std::size_t>(static_cast<int>(c) + n)] - oracle::raised_cosine(n / 8.0, 0.5)) < 2e-2);
}

TEST_CASE("srrc singular points use the analytic limit")
{
    // beta = 0.25, sps = 8: t = 1/(4 beta) = 1 symbol is a tap position.
    const auto h = dsp::design_srrc(0.25, 8, 8);
    CHECK(h.taps.allFinite());
    // Generic formula evaluated just beside the singular points.
    auto srrc = [](double t, double b) {
        using std::numbers::pi;
        return (std::sin(pi * t * (1 - b)) + 4 * b * t * std::cos(pi * t * (1 + b))) / (pi * t * (1 - 16 * b * b * t * t));
    };
    const double peak = srrc(1e-7, 0.25);
    CHECK(h.taps[40] / h.taps[32] == doctest::Approx(srrc(1.0 + 1e-7, 0.25) / peak).epsilon(1e-5));
    CHECK(h.taps[24] / h.taps[32] == doctest::Approx(srrc(-1.0 - 1e-7, 0.25) / peak).epsilon(1e-5));
}

TEST_CASE("srrc rejects invalid parameters")
{
    CHECK_THROWS_AS(dsp::design_srrc(0.0, 8, 8), ParameterError);
    CHECK_THROWS_AS(dsp::design_srrc(1.5, 8, 8), ParameterError);
    CHECK_THROWS_AS(dsp::design_srrc(0.5, 0, 8), ParameterError);
    CHECK_THROWS_AS(dsp::design_srrc(0.5, 8, -1), ParameterError);
    CHECK_THROWS_AS(dsp::design_srrc(0.5, 3, 3), ParameterError);
}

TEST_CASE("kaiser lowpass meets 40 dB and the cascade 80 dB")
{
    const auto h = dsp::design_kaiser_lowpass(0.09375, 0.140625, 40);
    CHECK(h.size() % 2 == 1);
    CHECK(dsp::is_symmetric(h.taps));
    const auto taps = to_std(h.taps);
    const auto cas = oracle::convolve(taps, taps);
    double worst = 0.0, worst_cas = 0.0, ripple_lo = 1e9, ripple_hi = 0.0;
    for (int k = 0; k <= 4096; ++k) {
        const double f = 0.5 * k / 4096.0;
        const double m = oracle::freq_response(taps, f);
        if (f >= 0.140625) {
            worst = std::max(worst, m);
            worst_cas = std::max(worst_cas, oracle::freq_response(cas, f));
        }
        if (f <= 0.09375) {
            ripple_lo = std::min(ripple_lo, m);
            ripple_hi = std::max(ripple_hi, m);
        }
    }
    CHECK(20 * std::log10(worst) <= -40.0);
    CHECK(20 * std::log10(worst_cas) <= -80.0);
    CHECK(20 * std::log10(ripple_hi / ripple_lo) <= 0.5);
}

TEST_CASE("kaiser lowpass rejects bad edges")
{
    CHECK_THROWS_AS(dsp::design_kaiser_lowpass(0.2, 0.1, 40), ParameterError);
    CHECK_THROWS_AS(dsp::design_kaiser_lowpass(0.1, 0.1, 40), ParameterError);
    CHECK_THROWS_AS(dsp::design_kaiser_lowpass(0.1, 0.6, 40), ParameterError);
    CHECK_THROWS_AS(dsp::design_kaiser_lowpass(0.1, 0.2, 0), ParameterError);
}

TEST_CASE("linear-phase designs have group delay (N-1)/2")
{
    for (const auto& h : {dsp::design_srrc(0.5, 8, 8), dsp::design_kaiser_lowpass(0.09375, 0.140625, 40)}) {
        // Phase slope of H(f) e^{j 2 pi f D} is zero for D = (N-1)/2.
        const double d = h.group_delay();
        for (double f : {0.001, 0.01, 0.03}) {
            cd acc{};
            for (Eigen::Index n = 0; n < h.size(); ++n)
                acc += h.taps[n] * std::polar(1.0, -2.0 * std::numbers::pi * f * (static_cast<double>(n) - d));
            CHECK(std::abs(acc.imag()) <= 1e-6 * std::abs(acc));
        }
        CHECK(d == doctest::Approx(0.5 * static_cast<double>(h.size() - 1)));
    }
}

TEST_CASE("fir impulse response")
{
    const auto t = dsp::make_taps<double>({1.0, 0.5});
    dsp::FirState<double> st(t.size());
    dsp::SampleBlockd in;
    in.samples = dsp::CVector<double>::Zero(5);
    in.samples[0] = 1.0;
    const auto out = dsp::fir_filter(in, t, st);
    REQUIRE(out.size() == 5);
    CHECK(out.samples[0] == cd(1.0));
    CHECK(out.samples[1] == cd(0.5));
    for (int k = 2; k < 5; ++k) CHECK(out.samples[k] == cd(0.0));
}

TEST_CASE("fir matches direct convolution")
{
    const auto taps = dsp::design_kaiser_lowpass(0.09375, 0.140625, 40);
    const auto x = noise_block(700, 3);
    dsp::FirState<double> st(taps.size());
    const auto y = dsp::fir_filter(x, taps, st);
    std::vector<cd> xs(x.samples.data(), x.samples.data() + x.size());
    std::vector<cd> h(taps.taps.data(), taps.taps.data() + taps.size());
    const auto ref = oracle::convolve(xs, h);
    double err = 0.0;
    for (Eigen::Index n = 0; n < y.size(); ++n) err = std::max(err, std::abs(y.samples[n] - ref[static_cast<std::size_t>(n)]));
    CHECK(err < 1e-12);
}

TEST_CASE("fir streaming is bit-identical for any blocking")
{
    for (const auto& taps : {dsp::design_srrc(0.5, 8, 8), dsp::design_kaiser_lowpass(0.09375, 0.140625, 40),
                             dsp::make_taps<double>({1.0, -0.25, 0.125, 0.3})}) {
        const auto x = noise_block(1000, 5, 77);
        dsp::FirState<double> one(taps.size());
        const auto whole = dsp::fir_filter(x, taps, one);
        for (int block : {1, 7, 64, 333}) {
            dsp::FirState<double> st(taps.size());
            Eigen::Index off = 0;
            bool same = true;
            while (off < x.size()) {
                const Eigen::Index len = std::min<Eigen::Index>(block, x.size() - off);
                const auto y = dsp::fir_filter(slice(x, off, len), taps, st);
                CHECK(y.start_index == x.start_index + off);
                for (Eigen::Index n = 0; n < len; ++n) same = same && y.samples[n] == whole.samples[off + n];
                off += len;
            }
            CHECK(same);
        }
    }
}

TEST_CASE("fir state mismatch is a contract error")
{
    const auto t = dsp::make_taps<double>({1.0, 0.5, 0.25});
    dsp::FirState<double> st(5);
    CHECK_THROWS_AS(dsp::fir_filter(noise_block(4, 1), t, st), ContractError);
}

TEST_CASE("kaiser filter suppresses stopband noise by 40 dB")
{
    const auto taps = dsp::design_kaiser_lowpass(0.09375, 0.140625, 40);
    const auto x = noise_block(1 << 15, 9);
    dsp::FirState<double> st(taps.size());
    const auto y = dsp::fir_filter(x, taps, st);
    // Averaged Blackman-Harris periodogram over 256-point segments.
    auto band_power = [](const dsp::SampleBlockd& b, Eigen::Index skip) {
        constexpr int n = 256;
        std::vector<double> w(n);
        for (int k = 0; k < n; ++k) {
            const double a = 2.0 * std::numbers::pi * k / n;
            w[static_cast<std::size_t>(k)] =
                0.35875 - 0.48829 * std::cos(a) + 0.14128 * std::cos(2 * a) - 0.01168 * std::cos(3 * a);
        }
        double sb = 0.0;
        for (Eigen::Index s = skip; s + n <= b.size(); s += n) {
            std::vector<cd> seg(b.samples.data() + s, b.samples.data() + s + n);
            for (int k = 0; k < n; ++k) seg[static_cast<std::size_t>(k)] *= w[static_cast<std::size_t>(k)];
            for (int k = 0; k < n; ++k) {
                double f = static_cast<double>(k) / n;
                if (f > 0.5) f -= 1.0;
                if (std::abs(f) >= 0.140625 + 6.0 / n) sb += oracle::dft_power(seg, f);
            }
        }
        return sb;
    };
    const double ratio = band_power(y, 256) / band_power(x, 256);
    CHECK(ratio <= 1e-4);
}

TEST_CASE("nco identity, inverse and quarter-rate rotation")
{
    const auto x = noise_block(257, 11, 1000);
    const auto id = dsp::nco_mix(x, 0.0, 0.0);
    CHECK((id.samples.array() == x.samples.array()).all());

    for (double f : {0.1171875, -0.3515625, 0.0123, 0.5}) {
        const auto back = dsp::nco_mix(dsp::nco_mix(x, f, 0.3), f == 0.5 ? 0.5 : -f, -0.3);
        CHECK((back.samples - x.samples).cwiseAbs().maxCoeff() < 1e-9);
        const auto y = dsp::nco_mix(x, f, 0.7);
        CHECK(std::abs(y.samples.squaredNorm() / x.samples.squaredNorm() - 1.0) < 1e-12);
    }

    dsp::SampleBlockd ones;
    ones.samples = dsp::CVector<double>::Ones(8);
    const auto q = dsp::nco_mix(ones, 0.25);
    const cd expect[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    for (int n = 0; n < 8; ++n) CHECK(std::abs(q.samples[n] - expect[n % 4]) < 1e-12);
    CHECK_THROWS_AS(dsp::nco_mix(ones, 0.6), ParameterError);
}

TEST_CASE("nco phase follows the absolute index")
{
    const auto x = noise_block(300, 4, 12345);
    const dsp::Nco<double> nco(-0.3515625);
    const auto whole = nco.mix(x);
    const auto part = nco.mix(slice(x, 100, 50));
    for (int n = 0; n < 50; ++n) CHECK(part.samples[n] == whole.samples[100 + n]);
    const auto ref = dsp::nco_mix(x, -0.3515625);
    CHECK((ref.samples - whole.samples).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("golay pair construction and complementarity")
{
    const auto g1 = dsp::golay_pair(1);
    CHECK(g1.a == std::vector<int>{1, 1});
    CHECK(g1.b == std::vector<int>{1, -1});
    for (int m = 1; m <= 10; ++m) {
        const auto g = dsp::golay_pair(m);
        const std::size_t n = g.size();
        CHECK(n == (std::size_t{1} << m));
        CHECK(oracle::autocorr(g.a, 0) + oracle::autocorr(g.b, 0) == static_cast<long long>(2 * n));
        bool zero = true;
        for (std::size_t lag = 1; lag < n; ++lag) zero = zero && oracle::autocorr(g.a, lag) + oracle::autocorr(g.b, lag) == 0;
        CHECK(zero);
    }
    const auto g8 = dsp::golay_pair(8);
    CHECK(oracle::autocorr(g8.a, 0) + oracle::autocorr(g8.b, 0) == 512);
    CHECK_THROWS_AS(dsp::golay_pair(0), ParameterError);
    CHECK_THROWS_AS(dsp::golay_pair(17), ParameterError);
}

TEST_CASE("rate change identity and errors")
{
    const auto x = noise_block(64, 2);
    const auto y = dsp::rate_change(x, 1, 1, dsp::make_taps<double>({1.0}));
    CHECK((y.samples.array() == x.samples.array()).all());
    CHECK_THROWS_AS(dsp::rate_change(x, 0, 1, dsp::make_taps<double>({1.0})), ParameterError);
    CHECK_THROWS_AS(dsp::rate_change(x, 1, 0, dsp::make_taps<double>({1.0})), ParameterError);
}

TEST_CASE("decimation keeps in-band tones and rejects out-of-band tones")
{
    const auto lp = dsp::design_kaiser_lowpass(0.09375, 0.140625, 40);
    const auto cas = dsp::cascade(lp, lp);
    const int n = 8192;
    auto tone = [&](double f) {
        dsp::SampleBlockd b;
        b.samples.resize(n);
        for (int k = 0; k < n; ++k) b.samples[k] = std::polar(1.0, 2.0 * std::numbers::pi * f * k);
        b.sample_rate = 8.0;
        return b;
    };
    auto steady_power = [&](const dsp::SampleBlockd& y) {
        const Eigen::Index skip = cas.size();
        return y.samples.segment(skip, y.size() - skip).squaredNorm() / static_cast<double>(y.size() - skip);
    };

    const double f_in = 0.03;
    const auto y = dsp::rate_change(tone(f_in), 1, 8, cas);
    CHECK(y.sample_rate == 1.0);
    CHECK(std::abs(10 * std::log10(steady_power(y))) <= 0.1);
    // The tone lands at 8 f_in cycles per output sample.
    std::vector<cd> seg(y.samples.data() + 256, y.samples.data() + 768);
    double best = 0.0, best_f = 0.0;
    for (int k = 0; k < 2048; ++k) {
        const double f = -0.5 + k / 2048.0;
        const double p = oracle::dft_power(seg, f);
        if (p > best) best = p, best_f = f;
    }
    CHECK(std::abs(best_f - 8 * f_in) < 1.0 / 1024);

    const auto z = dsp::rate_change(tone(0.2), 1, 8, lp);
    CHECK(10 * std::log10(steady_power(z)) <= -40.0);
}

} // TEST_SUITE
