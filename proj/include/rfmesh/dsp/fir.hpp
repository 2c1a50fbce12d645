#pragma once

#include <algorithm>
#include <vector>

#include "rfmesh/dsp/types.hpp"
#include "rfmesh/errors.hpp"

namespace rfmesh::dsp {

/// Delay line for a streaming FIR: the last (taps - 1) inputs, oldest first.
template <typename Scalar>
struct FirState {
    std::vector<std::complex<Scalar>> delay_line;

    FirState() = default;
    explicit FirState(Eigen::Index tap_count)
        : delay_line(static_cast<std::size_t>(tap_count > 0 ? tap_count - 1 : 0))
    {
    }

    void reset() { std::fill(delay_line.begin(), delay_line.end(), std::complex<Scalar>{}); }
};

namespace detail {

// out[n] = sum_k taps[k] * work[n + N - 1 - k], work = delay line followed by input.
// Symmetric taps are folded. Each output accumulates its terms in the same
// order whatever the block length, so streaming output is bit-identical to
// one-shot. The loops run tap-outer over planar copies so they vectorize.
template <typename Scalar>
void fir_kernel(const std::complex<Scalar>* work, Eigen::Index out_len, const RVector<Scalar>& taps,
                bool symmetric, std::complex<Scalar>* out)
{
    constexpr Eigen::Index kTile = 256;
    const Eigen::Index n_taps = taps.size();
    const Eigen::Index in_len = out_len + n_taps - 1;
    thread_local std::vector<Scalar> xr, xi, yr, yi;
    xr.resize(static_cast<std::size_t>(in_len));
    xi.resize(static_cast<std::size_t>(in_len));
    yr.assign(static_cast<std::size_t>(out_len), Scalar(0));
    yi.assign(static_cast<std::size_t>(out_len), Scalar(0));
    for (Eigen::Index n = 0; n < in_len; ++n) {
        xr[static_cast<std::size_t>(n)] = work[n].real();
        xi[static_cast<std::size_t>(n)] = work[n].imag();
    }
    const Scalar* t = taps.data();
    Scalar* __restrict ore = yr.data();
    Scalar* __restrict oim = yi.data();
    const Scalar* __restrict re = xr.data();
    const Scalar* __restrict im = xi.data();
    if (symmetric && n_taps % 2 == 1) {
        const Eigen::Index half = (n_taps - 1) / 2;
        const Scalar tc = t[half];
        for (Eigen::Index n0 = 0; n0 < out_len; n0 += kTile) {
            const Eigen::Index n1 = std::min(out_len, n0 + kTile);
            for (Eigen::Index n = n0; n < n1; ++n) {
                ore[n] = tc * re[n + half];
                oim[n] = tc * im[n + half];
            }
            for (Eigen::Index k = 0; k < half; ++k) {
                const Scalar tk = t[k];
                const Scalar* ra = re + (n_taps - 1 - k);
                const Scalar* rb = re + k;
                const Scalar* ia = im + (n_taps - 1 - k);
                const Scalar* ib = im + k;
                for (Eigen::Index n = n0; n < n1; ++n) {
                    ore[n] += tk * (ra[n] + rb[n]);
                    oim[n] += tk * (ia[n] + ib[n]);
                }
            }
        }
    } else {
        for (Eigen::Index n0 = 0; n0 < out_len; n0 += kTile) {
            const Eigen::Index n1 = std::min(out_len, n0 + kTile);
            for (Eigen::Index k = 0; k < n_taps; ++k) {
                const Scalar tk = t[k];
                const Scalar* ra = re + (n_taps - 1 - k);
                const Scalar* ia = im + (n_taps - 1 - k);
                for (Eigen::Index n = n0; n < n1; ++n) {
                    ore[n] += tk * ra[n];
                    oim[n] += tk * ia[n];
                }
            }
        }
    }
    for (Eigen::Index n = 0; n < out_len; ++n) out[n] = {ore[n], oim[n]};
}

} // namespace detail

/// Causal streaming convolution. Output has the input's length and start index;
/// the (N-1)/2 sample group delay of a linear-phase design is left to the caller.
template <typename Scalar>
SampleBlock<Scalar> fir_filter(const SampleBlock<Scalar>& input, const FirTaps<Scalar>& taps, FirState<Scalar>& state)
{
    if (taps.size() == 0) throw ContractError("fir_filter: empty taps");
    if (static_cast<Eigen::Index>(state.delay_line.size()) != taps.size() - 1)
        throw ContractError("fir_filter: state length must equal tap count - 1");

    const Eigen::Index hist = taps.size() - 1;
    const Eigen::Index len = input.size();
    std::vector<std::complex<Scalar>> work(static_cast<std::size_t>(hist + len));
    std::copy(state.delay_line.begin(), state.delay_line.end(), work.begin());
    std::copy(input.samples.data(), input.samples.data() + len, work.begin() + hist);

    SampleBlock<Scalar> out;
    out.sample_rate = input.sample_rate;
    out.start_index = input.start_index;
    out.samples.resize(len);
    detail::fir_kernel(work.data(), len, taps.taps, taps.description.symmetric, out.samples.data());

    std::copy(work.end() - hist, work.end(), state.delay_line.begin());
    return out;
}

/// Streaming filter object owning its taps and delay line.
template <typename Scalar>
class FirFilter {
public:
    FirFilter() = default;
    explicit FirFilter(FirTaps<Scalar> taps)
        : taps_(std::move(taps))
        , state_(taps_.size())
    {
    }

    SampleBlock<Scalar> process(const SampleBlock<Scalar>& in) { return fir_filter(in, taps_, state_); }
    void reset() { state_.reset(); }
    const FirTaps<Scalar>& taps() const { return taps_; }

private:
    FirTaps<Scalar> taps_;
    FirState<Scalar> state_;
};

} // namespace rfmesh::dsp
