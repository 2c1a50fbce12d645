#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "rfmesh/dsp/types.hpp"

namespace rfmesh::modem {

using cd = std::complex<double>;

struct DetectorConfig {
    int samples_per_symbol = 8;
    int golay_log2 = 8;            // Ga/Gb length 256 each
    double alpha = 8.0;
    int noise_window = 4096;
    double min_noise_floor = 0.05; // metric units; keeps a silent band from arming on leakage
    int search_extra_symbols = 32; // peak search spans the preamble plus filter transients

    int half_chips() const { return 1 << golay_log2; }
    /// Samples of input needed beyond index n to evaluate the metric at n.
    int metric_span() const { return (2 * half_chips() - 1) * samples_per_symbol; }
    int search_window() const { return (2 * half_chips() + search_extra_symbols) * samples_per_symbol; }
};

struct DetectionResult {
    std::int64_t sample_index = 0;      // first preamble chip, after timing refinement
    double metric = 0.0;
    double threshold_at_detection = 0.0;
    int timing_phase = 0;               // sample_index mod samples_per_symbol
    std::int64_t peak_index = 0;        // raw metric argmax
};

/// Correlations of `y` with Ga and Gb of length 2^log2, chips `spacing`
/// samples apart, by the recursive Golay butterfly. Output n holds
/// sum_k G[k] y[n + k spacing]; length y.size() - (2^log2 - 1) spacing.
void golay_correlate(std::span<const cd> y, int log2_length, int spacing, std::vector<cd>& corr_a,
                     std::vector<cd>& corr_b);

/// m[n] = |corr_Ga[n]| + |corr_Gb[n + 256 sps]| for every n with a full window.
std::vector<double> complementary_metric(std::span<const cd> y, const DetectorConfig& cfg = {});

/// Direct O(N L) evaluation of the same metric.
std::vector<double> complementary_metric_direct(std::span<const cd> y, const DetectorConfig& cfg = {});

/// Index in [peak - sps/2, peak + sps/2) maximizing the length-sps centered
/// moving average of the metric (half-weight end points). Ties go to the
/// lower index. `metric_at` returns the metric at an absolute index.
template <typename MetricAt>
std::int64_t refine_timing(std::int64_t peak, int sps, MetricAt&& metric_at)
{
    const int h = sps / 2;
    std::int64_t best = peak - h;
    double best_val = -1.0;
    for (std::int64_t q = peak - h; q < peak + h; ++q) {
        double acc = 0.5 * (metric_at(q - h) + metric_at(q + h));
        for (std::int64_t k = q - h + 1; k < q + h; ++k) acc += metric_at(k);
        if (acc > best_val) {
            best_val = acc;
            best = q;
        }
    }
    return best;
}

/// Streaming preamble detector over one or more matched-filter streams (the
/// metric is summed across streams). Samples are pushed in order; next()
/// advances the threshold state machine and returns at most one detection.
class FrameDetector {
public:
    explicit FrameDetector(DetectorConfig cfg = {});

    /// Append samples starting at absolute index `start_index`; every stream
    /// must have the same length. Indices must continue the previous push.
    void push(std::span<const std::span<const cd>> streams, std::int64_t start_index);
    void push(std::span<const cd> stream, std::int64_t start_index);

    std::optional<DetectionResult> next();

    /// Suppress detections for metric indices below `index`.
    void hold_until(std::int64_t index);

    /// No future detection can start before this index.
    std::int64_t earliest_pending_index() const;
    double noise_floor() const;
    bool warmed_up() const { return floor_count_ >= static_cast<std::size_t>(cfg_.noise_window); }
    const DetectorConfig& config() const { return cfg_; }

private:
    double metric_at(std::int64_t n) const;
    void floor_add(double v);

    DetectorConfig cfg_;
    std::vector<std::vector<cd>> tail_;   // unconsumed input per stream
    std::int64_t tail_start_ = 0;
    bool started_ = false;

    std::deque<double> metric_;           // metric history
    std::int64_t metric_start_ = 0;       // absolute index of metric_.front()
    std::int64_t cursor_ = 0;             // next metric index to examine

    std::vector<double> floor_ring_;
    std::size_t floor_pos_ = 0;
    std::size_t floor_count_ = 0;
    double floor_sum_ = 0.0;

    std::int64_t lockout_until_ = 0;
    std::int64_t exclude_until_ = 0;
    std::optional<std::int64_t> crossing_;
    double crossing_threshold_ = 0.0;
};

using DetectorState = FrameDetector;

/// Convenience wrapper: push one block and collect every detection available.
std::vector<DetectionResult> detect_frame(const dsp::SampleBlockd& stream, DetectorState& state);

} // namespace rfmesh::modem
