#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "rfmesh/dsp/types.hpp"
#include "rfmesh/errors.hpp"

namespace rfmesh::dsp {

namespace detail {

/// Smallest P <= 65536 with freq * P integral, or 0 if none. Periodic
/// oscillators reduce the sample index modulo P before forming the phase.
inline std::int64_t nco_period(double freq)
{
    for (std::int64_t p = 1; p <= 65536; p *= 2) {
        const double cycles = freq * static_cast<double>(p);
        if (cycles == std::round(cycles)) return p;
    }
    return 0;
}

inline double nco_phase(double freq, double initial_phase, std::int64_t index, std::int64_t period)
{
    const std::int64_t reduced = period > 0 ? ((index % period) + period) % period : index;
    return 2.0 * std::numbers::pi * freq * static_cast<double>(reduced) + initial_phase;
}

inline void check_nco_freq(double freq)
{
    if (!(freq > -0.5 && freq <= 0.5)) throw ParameterError("nco: freq_offset must be in (-0.5, 0.5]");
}

} // namespace detail

/// out[n] = in[n] * exp(j (2 pi f (start_index + n) + phase)). The phase is
/// taken from the absolute sample index, so mixing by -f undoes +f exactly.
template <typename Scalar>
SampleBlock<Scalar> nco_mix(const SampleBlock<Scalar>& input, double freq_offset, double initial_phase = 0.0)
{
    detail::check_nco_freq(freq_offset);
    const std::int64_t period = detail::nco_period(freq_offset);
    SampleBlock<Scalar> out = input;
    if (freq_offset == 0.0 && initial_phase == 0.0) return out;
    for (Eigen::Index n = 0; n < input.size(); ++n) {
        const double ph = detail::nco_phase(freq_offset, initial_phase, input.start_index + n, period);
        out.samples[n] = input.samples[n] * std::complex<Scalar>(std::polar(1.0, ph));
    }
    return out;
}

/// Oscillator with a cached phasor table for periodic frequencies. Produces
/// the same phasors as nco_mix, including the identity shortcut at f = 0.
template <typename Scalar>
class Nco {
public:
    Nco() = default;
    Nco(double freq_offset, double initial_phase = 0.0) { retune(freq_offset, initial_phase); }

    void retune(double freq_offset, double initial_phase = 0.0)
    {
        detail::check_nco_freq(freq_offset);
        freq_ = freq_offset;
        phase_ = initial_phase;
        period_ = detail::nco_period(freq_);
        table_.clear();
        if (period_ > 0 && period_ <= 4096) {
            table_.resize(static_cast<std::size_t>(period_));
            for (std::int64_t i = 0; i < period_; ++i)
                table_[static_cast<std::size_t>(i)] = std::polar(1.0, detail::nco_phase(freq_, phase_, i, period_));
        }
    }

    double frequency() const { return freq_; }

    std::complex<Scalar> phasor(std::int64_t index) const
    {
        if (!table_.empty()) return std::complex<Scalar>(table_[static_cast<std::size_t>(((index % period_) + period_) % period_)]);
        return std::complex<Scalar>(std::polar(1.0, detail::nco_phase(freq_, phase_, index, period_)));
    }

    /// Mixes samples[0..n) that sit at absolute indices start_index + k, in place.
    void mix_inplace(std::complex<Scalar>* samples, Eigen::Index n, std::int64_t start_index) const
    {
        if (freq_ == 0.0 && phase_ == 0.0) return;
        for (Eigen::Index k = 0; k < n; ++k) samples[k] *= phasor(start_index + k);
    }

    SampleBlock<Scalar> mix(const SampleBlock<Scalar>& in) const
    {
        SampleBlock<Scalar> out = in;
        mix_inplace(out.samples.data(), out.size(), out.start_index);
        return out;
    }

private:
    double freq_ = 0.0;
    double phase_ = 0.0;
    std::int64_t period_ = 1;
    std::vector<std::complex<double>> table_;
};

} // namespace rfmesh::dsp
