#pragma once

#include <array>
#include <vector>

#include "rfmesh/dsp/types.hpp"
#include "rfmesh/framing/frame.hpp"
#include "rfmesh/mesh/band_plan.hpp"

namespace rfmesh::modem {

using cd = std::complex<double>;

struct TxConfig {
    int band_index = 0;
    double gain = 1.0;          // linear amplitude
    framing::Modulation modulation = framing::Modulation::Qam16;
    framing::DiversityMode diversity_mode = framing::DiversityMode::Alamouti;
    int samples_per_symbol = 8;

    void validate(const mesh::BandPlan& band) const;
};

/// Per-antenna symbol streams for one frame, indexed by frame symbol position.
struct FrameSymbols {
    std::array<std::vector<cd>, 2> antenna;
    framing::FrameGeometry geometry;
};

/// Antenna 0 carries preamble, header and pilots. Training A is sent from
/// antenna 0 and training B from antenna 1, each with the other antenna
/// silent. Data (payload then CRC) is sent from antenna 0 alone in single-TX
/// mode; in Alamouti mode consecutive data pairs (s1, s2) go out as
/// antenna 0: s1, -conj(s2) and antenna 1: s2, conj(s1).
FrameSymbols build_frame_symbols(const framing::EncodedFrame& frame, framing::DiversityMode mode,
                                 const framing::TrainingSequences& training);

/// Frame symbols -> composite-rate samples for both antennas: zero-stuffed by
/// samples_per_symbol, SRRC shaped (65 taps, roll-off 0.5), scaled by gain and
/// shifted to the band center. Output length is symbols * sps + 64 per antenna
/// and start_index is the absolute index of the first sample.
std::array<dsp::SampleBlockd, 2> tx_frame(const framing::EncodedFrame& frame, const TxConfig& cfg,
                                          const mesh::BandPlan& band, std::int64_t start_index = 0);

/// Shared pulse-shaping filter: SRRC, roll-off 0.5, span 8 symbols.
const dsp::FirTapsd& shaping_filter(int samples_per_symbol);

} // namespace rfmesh::modem
