#include "rfmesh/dsp/filter_design.hpp"

#include <algorithm>
#include <cmath>

namespace rfmesh::dsp {

double magnitude_response(const RVector<double>& taps, double f)
{
    const double w = 2.0 * std::numbers::pi * f;
    double re = 0.0;
    double im = 0.0;
    for (Eigen::Index k = 0; k < taps.size(); ++k) {
        re += taps[k] * std::cos(w * static_cast<double>(k));
        im -= taps[k] * std::sin(w * static_cast<double>(k));
    }
    return std::hypot(re, im);
}

std::vector<double> magnitude_response_grid(const RVector<double>& taps, int points)
{
    std::vector<double> out(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i)
        out[static_cast<std::size_t>(i)] = magnitude_response(taps, 0.5 * i / (points - 1));
    return out;
}

double kaiser_beta(double atten_db)
{
    if (atten_db > 50.0) return 0.1102 * (atten_db - 8.7);
    if (atten_db >= 21.0) return 0.5842 * std::pow(atten_db - 21.0, 0.4) + 0.07886 * (atten_db - 21.0);
    return 0.0;
}

int kaiser_length(double atten_db, double transition_width)
{
    const double order = (atten_db - 7.95) / (2.285 * 2.0 * std::numbers::pi * transition_width);
    int length = static_cast<int>(std::ceil(order)) + 1;
    length = std::max(length, 3);
    if (length % 2 == 0) ++length;
    return length;
}

namespace detail {

RVector<double> kaiser_windowed_sinc(int length, double cutoff, double beta)
{
    RVector<double> h(length);
    const int m = (length - 1) / 2;
    const double i0_beta = std::cyl_bessel_i(0.0, beta);
    for (int n = 0; n < length; ++n) {
        const int k = n - m;
        const double r = static_cast<double>(k) / m;
        const double w = std::cyl_bessel_i(0.0, beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0_beta;
        const double x = 2.0 * cutoff * k;
        const double sinc = k == 0 ? 1.0 : std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
        h[n] = 2.0 * cutoff * sinc * w;
    }
    h /= h.sum();
    for (int k = 0; k < m; ++k) h[length - 1 - k] = h[k];
    return h;
}

bool meets_lowpass_spec(const RVector<double>& taps, double passband_edge, double stopband_edge,
                        double atten_db, double max_ripple_db)
{
    constexpr int kGrid = 4096;
    const double stop_limit = std::pow(10.0, -atten_db / 20.0);
    double pass_max = 0.0;
    double pass_min = 1e300;
    for (int i = 0; i < kGrid; ++i) {
        const double f = 0.5 * i / (kGrid - 1);
        const double mag = magnitude_response(taps, f);
        if (f <= passband_edge) {
            pass_max = std::max(pass_max, mag);
            pass_min = std::min(pass_min, mag);
        } else if (f >= stopband_edge && mag > stop_limit) {
            return false;
        }
    }
    return 20.0 * std::log10(pass_max / pass_min) <= max_ripple_db;
}

} // namespace detail
} // namespace rfmesh::dsp
