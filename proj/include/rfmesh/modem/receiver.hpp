#pragma once

#include <array>
#include <optional>
#include <vector>

#include "rfmesh/modem/channelizer.hpp"
#include "rfmesh/modem/detector.hpp"
#include "rfmesh/modem/equalizer.hpp"
#include "rfmesh/modem/estimation.hpp"
#include "rfmesh/modem/metrics.hpp"

namespace rfmesh::modem {

struct RxConfig {
    DetectorConfig detector;
    EqualizerConfig equalizer;
    framing::FrameLayout layout;
    std::uint64_t training_seed = framing::kDefaultTrainingSeed;
    double phase_gain = 0.5;        // first-order pilot phase loop
    int scatter_points = 64;        // per frame
    int gate_margin = 128;          // samples trimmed from each end of the guard gate
};

/// Symbol-rate view of one detected frame on both RX antennas.
struct FrameSamples {
    std::int64_t start = 0;         // matched-filter index of symbol 0
    int sps = 8;
    const std::array<std::vector<cd>, 2>* mf = nullptr;
    std::int64_t mf_start = 0;

    cd at(int antenna, std::int64_t symbol) const;
};

/// Receive chain for one band on a two-antenna node: channelize both
/// antennas, detect, recover timing, estimate, combine, track phase, equalize,
/// demap, check CRC, measure. Equalizer taps carry over between frames.
class LinkReceiver {
public:
    LinkReceiver(const mesh::BandPlan& plan, int band_index, RxConfig cfg = {});

    /// Feed one composite-rate block per RX antenna (same start and length).
    std::vector<FrameReport> process(const std::array<dsp::SampleBlockd, 2>& composite);

    /// Retune both channelizers at a composite input index.
    void schedule_retune(std::int64_t at_index, int band_index);

    int band_index() const { return band_; }
    const LmsEqualizer& equalizer() const { return eq_; }
    const FrameDetector& detector() const { return det_; }
    /// Composite-to-matched-filter delay in composite samples (filters only).
    double group_delay() const { return chan_[0].group_delay(); }

private:
    enum class Step { NeedMore, Done };
    Step try_decode(const DetectionResult& det, FrameReport& report);
    void trim();

    mesh::BandPlan plan_;
    int band_;
    RxConfig cfg_;
    framing::TrainingSequences training_;
    std::vector<int> preamble_;
    std::array<Channelizer, 2> chan_;
    FrameDetector det_;
    LmsEqualizer eq_;

    std::array<std::vector<cd>, 2> mf_;
    std::int64_t mf_start_ = 0;
    std::int64_t mf_origin_ = 0;
    bool started_ = false;
    std::optional<DetectionResult> pending_;
};

/// Decode every frame in a finite two-antenna capture (fresh receiver state).
std::vector<FrameReport> receive_capture(const std::array<dsp::SampleBlockd, 2>& composite, const mesh::BandPlan& plan,
                                         int band_index, const RxConfig& cfg = {});

} // namespace rfmesh::modem
