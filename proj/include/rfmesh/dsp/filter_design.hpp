#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "rfmesh/dsp/types.hpp"
#include "rfmesh/errors.hpp"

namespace rfmesh::dsp {

/// Magnitude response |H(f)| of real taps at normalized frequency f (cycles/sample).
double magnitude_response(const RVector<double>& taps, double f);

/// Response evaluated on `points` frequencies uniformly spaced over [0, 0.5].
std::vector<double> magnitude_response_grid(const RVector<double>& taps, int points);

/// Kaiser window shape parameter for a stopband attenuation in dB.
double kaiser_beta(double atten_db);

/// Kaiser order estimate (length, forced odd) for the given transition width.
int kaiser_length(double atten_db, double transition_width);

namespace detail {

inline double srrc_sample(double t, double beta)
{
    using std::numbers::pi;
    if (t == 0.0) return 1.0 - beta + 4.0 * beta / pi;
    const double singular = 1.0 / (4.0 * beta);
    if (std::abs(std::abs(t) - singular) < 1e-12) {
        return beta / std::sqrt(2.0)
            * ((1.0 + 2.0 / pi) * std::sin(pi / (4.0 * beta))
               + (1.0 - 2.0 / pi) * std::cos(pi / (4.0 * beta)));
    }
    const double num = std::sin(pi * t * (1.0 - beta)) + 4.0 * beta * t * std::cos(pi * t * (1.0 + beta));
    const double den = pi * t * (1.0 - (4.0 * beta * t) * (4.0 * beta * t));
    return num / den;
}

RVector<double> kaiser_windowed_sinc(int length, double cutoff, double beta);

bool meets_lowpass_spec(const RVector<double>& taps, double passband_edge, double stopband_edge,
                        double atten_db, double max_ripple_db);

} // namespace detail

/// Square-root raised cosine, span_symbols * samples_per_symbol + 1 taps, unit energy.
/// The removable singularities at t = 0 and |t| = Ts / (4 roll_off) use their limits.
template <typename Scalar = double>
FirTaps<Scalar> design_srrc(double roll_off, int span_symbols, int samples_per_symbol)
{
    if (!(roll_off > 0.0 && roll_off <= 1.0))
        throw ParameterError("design_srrc: roll_off must be in (0, 1]");
    if (span_symbols <= 0 || samples_per_symbol <= 0)
        throw ParameterError("design_srrc: span and samples_per_symbol must be positive");
    const int order = span_symbols * samples_per_symbol;
    if (order % 2 != 0)
        throw ParameterError("design_srrc: span_symbols * samples_per_symbol must be even");

    const int n_taps = order + 1;
    const int center = order / 2;
    RVector<double> h(n_taps);
    for (int n = 0; n < n_taps; ++n) {
        // Exact rational offset; keeps t == 1/(4 beta) hits exact for common sps.
        const double t = static_cast<double>(n - center) / samples_per_symbol;
        h[n] = detail::srrc_sample(t, roll_off);
    }
    h /= std::sqrt(h.squaredNorm());
    // Enforce exact symmetry against rounding in the trig evaluation.
    for (int k = 0; k < center; ++k) h[n_taps - 1 - k] = h[k];

    FirTaps<Scalar> out;
    out.taps = h.cast<Scalar>();
    out.description.kind = "srrc";
    out.description.roll_off = roll_off;
    out.description.samples_per_symbol = samples_per_symbol;
    out.description.symmetric = true;
    return out;
}

/// Windowed-sinc low-pass (unit DC gain). Length starts at the Kaiser order
/// estimate and grows by two taps until the measured response on a
/// 4096-point grid meets both the attenuation and a 0.5 dB ripple limit.
template <typename Scalar = double>
FirTaps<Scalar> design_kaiser_lowpass(double passband_edge, double stopband_edge, double stopband_atten_db)
{
    if (!(passband_edge > 0.0 && passband_edge < stopband_edge && stopband_edge < 0.5))
        throw ParameterError("design_kaiser_lowpass: need 0 < passband_edge < stopband_edge < 0.5");
    if (!(stopband_atten_db > 0.0))
        throw ParameterError("design_kaiser_lowpass: attenuation must be positive");

    const double beta = kaiser_beta(stopband_atten_db);
    const double cutoff = 0.5 * (passband_edge + stopband_edge);
    int length = kaiser_length(stopband_atten_db, stopband_edge - passband_edge);
    RVector<double> h;
    for (int attempt = 0; attempt < 64; ++attempt, length += 2) {
        h = detail::kaiser_windowed_sinc(length, cutoff, beta);
        if (detail::meets_lowpass_spec(h, passband_edge, stopband_edge, stopband_atten_db, 0.5)) break;
    }

    FirTaps<Scalar> out;
    out.taps = h.cast<Scalar>();
    out.description.kind = "kaiser_lowpass";
    out.description.passband_edge = passband_edge;
    out.description.stopband_edge = stopband_edge;
    out.description.stopband_atten_db = stopband_atten_db;
    out.description.kaiser_beta = beta;
    out.description.symmetric = true;
    return out;
}

/// Full linear convolution of two tap sets (used to build cascades).
template <typename Scalar>
FirTaps<Scalar> cascade(const FirTaps<Scalar>& a, const FirTaps<Scalar>& b)
{
    const Eigen::Index n = a.size() + b.size() - 1;
    RVector<Scalar> h = RVector<Scalar>::Zero(n);
    for (Eigen::Index i = 0; i < a.size(); ++i)
        for (Eigen::Index j = 0; j < b.size(); ++j) h[i + j] += a.taps[i] * b.taps[j];
    FirTaps<Scalar> out;
    out.taps = std::move(h);
    out.description.kind = "cascade";
    out.description.symmetric = is_symmetric(out.taps);
    return out;
}

} // namespace rfmesh::dsp
