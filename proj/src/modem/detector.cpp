#include "rfmesh/modem/detector.hpp"

#include <algorithm>
#include <cmath>

#include "rfmesh/dsp/golay.hpp"
#include "rfmesh/errors.hpp"

namespace rfmesh::modem {

void golay_correlate(std::span<const cd> y, int log2_length, int spacing, std::vector<cd>& corr_a,
                     std::vector<cd>& corr_b)
{
    const std::size_t span = static_cast<std::size_t>(((1 << log2_length) - 1) * spacing);
    if (y.size() <= span) {
        corr_a.clear();
        corr_b.clear();
        return;
    }
    corr_a.assign(y.begin(), y.end());
    corr_b.assign(y.begin(), y.end());
    std::size_t len = y.size();
    for (int m = 0; m < log2_length; ++m) {
        const std::size_t shift = static_cast<std::size_t>((1 << m) * spacing);
        len -= shift;
        for (std::size_t n = 0; n < len; ++n) {
            const cd a = corr_a[n];
            const cd b = corr_b[n + shift];
            corr_a[n] = a + b;
            corr_b[n] = a - b;
        }
    }
    corr_a.resize(len);
    corr_b.resize(len);
}

std::vector<double> complementary_metric(std::span<const cd> y, const DetectorConfig& cfg)
{
    std::vector<cd> ca, cb;
    golay_correlate(y, cfg.golay_log2, cfg.samples_per_symbol, ca, cb);
    const std::size_t off = static_cast<std::size_t>(cfg.half_chips() * cfg.samples_per_symbol);
    if (ca.size() <= off) return {};
    std::vector<double> m(ca.size() - off);
    for (std::size_t n = 0; n < m.size(); ++n) m[n] = std::sqrt(std::norm(ca[n])) + std::sqrt(std::norm(cb[n + off]));
    return m;
}

std::vector<double> complementary_metric_direct(std::span<const cd> y, const DetectorConfig& cfg)
{
    const auto g = dsp::golay_pair(cfg.golay_log2);
    const std::size_t d = static_cast<std::size_t>(cfg.samples_per_symbol);
    const std::size_t len = g.size();
    const std::size_t need = (2 * len - 1) * d + 1;
    if (y.size() < need) return {};
    std::vector<double> m(y.size() - need + 1);
    for (std::size_t n = 0; n < m.size(); ++n) {
        cd a{}, b{};
        for (std::size_t k = 0; k < len; ++k) {
            a += static_cast<double>(g.a[k]) * y[n + k * d];
            b += static_cast<double>(g.b[k]) * y[n + (len + k) * d];
        }
        m[n] = std::abs(a) + std::abs(b);
    }
    return m;
}

FrameDetector::FrameDetector(DetectorConfig cfg)
    : cfg_(cfg)
    , floor_ring_(static_cast<std::size_t>(cfg.noise_window), 0.0)
{
    if (cfg_.samples_per_symbol < 1 || cfg_.golay_log2 < 1 || cfg_.noise_window < 1 || !(cfg_.alpha > 0.0))
        throw ParameterError("FrameDetector: invalid configuration");
}

void FrameDetector::push(std::span<const cd> stream, std::int64_t start_index)
{
    const std::span<const cd> one[1] = {stream};
    push(std::span<const std::span<const cd>>(one), start_index);
}

void FrameDetector::push(std::span<const std::span<const cd>> streams, std::int64_t start_index)
{
    if (streams.empty()) return;
    if (!started_) {
        tail_.assign(streams.size(), {});
        tail_start_ = start_index;
        metric_start_ = start_index;
        cursor_ = start_index;
        lockout_until_ = exclude_until_ = start_index;
        started_ = true;
    }
    if (streams.size() != tail_.size()) throw ContractError("FrameDetector: stream count changed");
    const std::size_t n = streams[0].size();
    for (const auto& s : streams)
        if (s.size() != n) throw ContractError("FrameDetector: stream lengths differ");
    if (start_index != tail_start_ + static_cast<std::int64_t>(tail_[0].size()))
        throw ContractError("FrameDetector: non-contiguous push");
    if (n == 0) return;

    for (std::size_t a = 0; a < streams.size(); ++a) tail_[a].insert(tail_[a].end(), streams[a].begin(), streams[a].end());

    std::vector<double> sum;
    for (const auto& t : tail_) {
        auto m = complementary_metric(t, cfg_);
        if (sum.empty()) sum = std::move(m);
        else
            for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += m[k];
    }
    if (sum.empty()) return;
    metric_.insert(metric_.end(), sum.begin(), sum.end());
    for (auto& t : tail_) t.erase(t.begin(), t.begin() + static_cast<std::ptrdiff_t>(sum.size()));
    tail_start_ += static_cast<std::int64_t>(sum.size());

    // History needed: the open search window plus the timing neighbourhood.
    const std::int64_t keep_from = std::min(crossing_.value_or(cursor_), cursor_) - 2 * cfg_.samples_per_symbol;
    while (!metric_.empty() && metric_start_ < keep_from) {
        metric_.pop_front();
        ++metric_start_;
    }
}

double FrameDetector::metric_at(std::int64_t n) const
{
    const std::int64_t k = n - metric_start_;
    if (k < 0 || k >= static_cast<std::int64_t>(metric_.size())) return 0.0;
    return metric_[static_cast<std::size_t>(k)];
}

void FrameDetector::floor_add(double v)
{
    floor_sum_ += v - floor_ring_[floor_pos_];
    floor_ring_[floor_pos_] = v;
    floor_pos_ = (floor_pos_ + 1) % floor_ring_.size();
    if (floor_count_ < floor_ring_.size()) ++floor_count_;
    else if (floor_pos_ == 0) {
        // Periodic exact resum keeps the running sum from drifting.
        floor_sum_ = 0.0;
        for (double x : floor_ring_) floor_sum_ += x;
    }
}

double FrameDetector::noise_floor() const
{
    const double mean = floor_count_ ? floor_sum_ / static_cast<double>(floor_count_) : 0.0;
    return std::max(mean, cfg_.min_noise_floor);
}

void FrameDetector::hold_until(std::int64_t index)
{
    lockout_until_ = std::max(lockout_until_, index);
}

std::int64_t FrameDetector::earliest_pending_index() const
{
    return crossing_ ? std::min(*crossing_, cursor_) : cursor_;
}

std::optional<DetectionResult> FrameDetector::next()
{
    const std::int64_t end = metric_start_ + static_cast<std::int64_t>(metric_.size());
    const int sps = cfg_.samples_per_symbol;
    const std::int64_t preamble_len = 2LL * cfg_.half_chips() * sps;
    while (cursor_ < end) {
        if (crossing_) {
            const std::int64_t c = *crossing_;
            const std::int64_t stop = c + cfg_.search_window();
            if (stop + sps > end) return std::nullopt; // window not complete yet
            std::int64_t peak = c;
            double peak_val = metric_at(c);
            for (std::int64_t n = c + 1; n < stop; ++n) {
                const double v = metric_at(n);
                if (v > peak_val) {
                    peak_val = v;
                    peak = n;
                }
            }
            const std::int64_t q = refine_timing(peak, sps, [this](std::int64_t n) { return metric_at(n); });
            DetectionResult det;
            det.sample_index = q;
            det.peak_index = peak;
            det.metric = peak_val;
            det.threshold_at_detection = crossing_threshold_;
            det.timing_phase = static_cast<int>(((q % sps) + sps) % sps);
            crossing_.reset();
            exclude_until_ = std::max(exclude_until_, peak + preamble_len);
            lockout_until_ = std::max(lockout_until_, peak + preamble_len);
            cursor_ = std::max(cursor_, stop);
            return det;
        }
        const std::int64_t n = cursor_;
        const double v = metric_at(n);
        if (n < lockout_until_) {
            if (n >= exclude_until_) floor_add(v);
            ++cursor_;
            continue;
        }
        const double thr = cfg_.alpha * noise_floor();
        if (warmed_up() && v > thr) {
            crossing_ = n;
            crossing_threshold_ = thr;
            exclude_until_ = std::max(exclude_until_, n);
            ++cursor_;
            continue;
        }
        floor_add(v);
        ++cursor_;
    }
    return std::nullopt;
}

std::vector<DetectionResult> detect_frame(const dsp::SampleBlockd& stream, DetectorState& state)
{
    state.push(stream.view(), stream.start_index);
    std::vector<DetectionResult> out;
    while (auto d = state.next()) out.push_back(*d);
    return out;
}

} // namespace rfmesh::modem
