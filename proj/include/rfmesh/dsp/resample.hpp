#pragma once

#include "rfmesh/dsp/types.hpp"
#include "rfmesh/errors.hpp"

namespace rfmesh::dsp {

/// Integer up/down rate change: zero-stuff by `up`, filter with `anti_alias`
/// (no implicit gain), keep every `down`-th sample. Computed polyphase: only
/// nonzero products are formed. Output length is ceil(len * up / down).
template <typename Scalar>
SampleBlock<Scalar> rate_change(const SampleBlock<Scalar>& input, int up, int down, const FirTaps<Scalar>& anti_alias)
{
    if (up < 1 || down < 1) throw ParameterError("rate_change: up and down must be >= 1");
    if (anti_alias.size() == 0) throw ParameterError("rate_change: empty anti-alias taps");

    const Eigen::Index in_len = input.size();
    const Eigen::Index up_len = in_len * up;
    const Eigen::Index out_len = (up_len + down - 1) / down;
    const Eigen::Index n_taps = anti_alias.size();

    SampleBlock<Scalar> out;
    out.sample_rate = input.sample_rate * up / down;
    out.start_index = input.start_index * up / down;
    out.samples.resize(out_len);
    for (Eigen::Index m = 0; m < out_len; ++m) {
        const Eigen::Index pos = m * down;   // index into the zero-stuffed stream
        std::complex<Scalar> acc{};
        // Taps that land on a nonzero (stuffed) sample: pos - k divisible by up.
        for (Eigen::Index k = pos % up; k < n_taps && k <= pos; k += up)
            acc += anti_alias.taps[k] * input.samples[(pos - k) / up];
        out.samples[m] = acc;
    }
    return out;
}

} // namespace rfmesh::dsp
