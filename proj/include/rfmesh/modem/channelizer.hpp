#pragma once

#include <optional>

#include "rfmesh/dsp/fir.hpp"
#include "rfmesh/dsp/nco.hpp"
#include "rfmesh/mesh/band_plan.hpp"

namespace rfmesh::modem {

/// One stage of the band-isolation cascade (Kaiser, >= 40 dB).
const dsp::FirTapsd& band_isolation_filter(const mesh::BandPlan& plan);

/// Streaming channelizer for one band of one antenna: NCO shift of the band
/// center to DC, two identical isolation low-pass stages, integer decimation
/// to samples_per_symbol, matched SRRC. Output indices are decimated input
/// indices; the total group delay (isolation cascade + SRRC) is not removed.
class Channelizer {
public:
    Channelizer(const mesh::BandPlan& plan, int band_index);

    dsp::SampleBlockd process(const dsp::SampleBlockd& composite);

    /// Switch band at absolute input index `at_index` (takes effect inside a
    /// later process call if the index lies ahead). Filter state is kept.
    void schedule_retune(std::int64_t at_index, int band_index);
    int band_index() const { return band_; }

    /// Group delay from composite input to matched-filter output, in input samples.
    double group_delay() const;

private:
    void retune_now(int band_index);
    dsp::SampleBlockd run(const dsp::SampleBlockd& composite);

    mesh::BandPlan plan_;
    int band_;
    dsp::Nco<double> nco_;
    dsp::FirFilter<double> stage1_;
    dsp::FirFilter<double> stage2_;
    dsp::FirFilter<double> matched_;
    std::optional<std::pair<std::int64_t, int>> pending_retune_;
};

/// Per-sample matched-filter output power for unit-power symbols sent through
/// tx_frame (gain 1) and an ideal channel, averaged over symbol phase.
double mf_signal_power(const mesh::BandPlan& plan);

/// Matched-filter output noise power per unit composite-rate noise variance.
double mf_noise_gain(const mesh::BandPlan& plan);

/// Composite-rate complex noise variance giving `snr_db` at the matched-filter
/// output for unit-power symbols at unit gain.
double noise_power_for_snr(const mesh::BandPlan& plan, double snr_db);

/// One-shot channelize with fresh filter state.
dsp::SampleBlockd channelize(const dsp::SampleBlockd& rx, int band_index, const mesh::BandPlan& plan);

} // namespace rfmesh::modem
