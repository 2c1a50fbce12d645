#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string>

#include <Eigen/Core>

namespace rfmesh::dsp {

template <typename Scalar>
using CVector = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;

template <typename Scalar>
using RVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Contiguous complex baseband samples. `start_index` is the absolute sample
/// index of samples[0] since the start of the stream.
template <typename Scalar>
struct SampleBlock {
    CVector<Scalar> samples;
    double sample_rate = 1.0;
    std::int64_t start_index = 0;

    Eigen::Index size() const { return samples.size(); }
    bool empty() const { return samples.size() == 0; }
    std::int64_t end_index() const { return start_index + samples.size(); }
    std::span<const std::complex<Scalar>> view() const
    {
        return {samples.data(), static_cast<std::size_t>(samples.size())};
    }
};

struct FilterDescription {
    std::string kind;            // "srrc", "kaiser_lowpass", "custom"
    double roll_off = 0.0;
    int samples_per_symbol = 0;
    double passband_edge = 0.0;  // cycles/sample
    double stopband_edge = 0.0;
    double stopband_atten_db = 0.0;
    double kaiser_beta = 0.0;
    bool symmetric = false;
};

/// Real FIR coefficients plus the parameters they were designed from.
template <typename Scalar>
struct FirTaps {
    RVector<Scalar> taps;
    FilterDescription description;

    Eigen::Index size() const { return taps.size(); }
    /// Group delay in samples for linear-phase designs.
    double group_delay() const { return 0.5 * static_cast<double>(taps.size() - 1); }
};

using SampleBlockd = SampleBlock<double>;
using FirTapsd = FirTaps<double>;
using cd = std::complex<double>;

template <typename Scalar>
bool is_symmetric(const RVector<Scalar>& taps)
{
    const auto n = taps.size();
    for (Eigen::Index k = 0; k < n / 2; ++k)
        if (taps[k] != taps[n - 1 - k]) return false;
    return true;
}

/// Wraps arbitrary coefficients, e.g. `{1.0, 0.5}` for a test impulse response.
template <typename Scalar>
FirTaps<Scalar> make_taps(std::initializer_list<Scalar> values)
{
    FirTaps<Scalar> t;
    t.taps.resize(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (Scalar v : values) t.taps[i++] = v;
    t.description.kind = "custom";
    t.description.symmetric = is_symmetric(t.taps);
    return t;
}

} // namespace rfmesh::dsp
