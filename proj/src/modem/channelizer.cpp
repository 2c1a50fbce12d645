#include "rfmesh/modem/channelizer.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

#include "rfmesh/dsp/filter_design.hpp"
#include "rfmesh/errors.hpp"
#include "rfmesh/modem/transmitter.hpp"

namespace rfmesh::modem {

const dsp::FirTapsd& band_isolation_filter(const mesh::BandPlan& plan)
{
    using Key = std::tuple<double, double, double>;
    static std::mutex mu;
    static std::map<Key, dsp::FirTapsd> cache;
    const Key key{plan.passband_edge_normalized(), plan.stopband_edge_normalized(), plan.isolation_atten_db};
    std::lock_guard lock(mu);
    auto it = cache.find(key);
    if (it == cache.end())
        it = cache.emplace(key, dsp::design_kaiser_lowpass<double>(std::get<0>(key), std::get<1>(key), std::get<2>(key))).first;
    return it->second;
}

Channelizer::Channelizer(const mesh::BandPlan& plan, int band_index)
    : plan_(plan)
    , band_(band_index)
    , nco_(-plan.center_normalized(band_index))
    , stage1_(band_isolation_filter(plan))
    , stage2_(band_isolation_filter(plan))
    , matched_(shaping_filter(plan.samples_per_symbol))
{
    if (plan.decimation() < 1) throw ParameterError("Channelizer: composite rate below samples_per_symbol");
}

void Channelizer::schedule_retune(std::int64_t at_index, int band_index)
{
    if (band_index < 0 || band_index >= plan_.band_count()) throw ParameterError("Channelizer: invalid band index");
    pending_retune_ = {at_index, band_index};
}

void Channelizer::retune_now(int band_index)
{
    band_ = band_index;
    nco_.retune(-plan_.center_normalized(band_index));
}

double Channelizer::group_delay() const
{
    return stage1_.taps().group_delay() + stage2_.taps().group_delay()
        + matched_.taps().group_delay() * plan_.decimation();
}

dsp::SampleBlockd Channelizer::run(const dsp::SampleBlockd& composite)
{
    dsp::SampleBlockd x = nco_.mix(composite);
    x = stage2_.process(stage1_.process(x));
    const int d = plan_.decimation();
    if (d > 1) {
        // Keep inputs whose absolute index is a multiple of d.
        const std::int64_t first = ((x.start_index + d - 1) / d) * d;
        const Eigen::Index offset = static_cast<Eigen::Index>(first - x.start_index);
        const Eigen::Index count = offset < x.size() ? (x.size() - offset + d - 1) / d : 0;
        dsp::SampleBlockd dec;
        dec.samples.resize(count);
        for (Eigen::Index k = 0; k < count; ++k) dec.samples[k] = x.samples[offset + k * d];
        dec.start_index = first / d;
        dec.sample_rate = x.sample_rate / d;
        x = std::move(dec);
    }
    return matched_.process(x);
}

dsp::SampleBlockd Channelizer::process(const dsp::SampleBlockd& composite)
{
    if (composite.empty()) {
        dsp::SampleBlockd out;
        out.sample_rate = composite.sample_rate / plan_.decimation();
        out.start_index = composite.start_index / plan_.decimation();
        return out;
    }
    if (pending_retune_ && pending_retune_->first <= composite.start_index) {
        retune_now(pending_retune_->second);
        pending_retune_.reset();
    }
    if (pending_retune_ && pending_retune_->first < composite.end_index()) {
        const Eigen::Index split = static_cast<Eigen::Index>(pending_retune_->first - composite.start_index);
        dsp::SampleBlockd head{composite.samples.head(split), composite.sample_rate, composite.start_index};
        dsp::SampleBlockd tail{composite.samples.tail(composite.size() - split), composite.sample_rate,
                               composite.start_index + split};
        dsp::SampleBlockd a = run(head);
        retune_now(pending_retune_->second);
        pending_retune_.reset();
        dsp::SampleBlockd b = run(tail);
        dsp::SampleBlockd out;
        out.sample_rate = a.sample_rate;
        out.start_index = a.start_index;
        out.samples.resize(a.size() + b.size());
        out.samples << a.samples, b.samples;
        return out;
    }
    return run(composite);
}

namespace {

Eigen::VectorXd rx_cascade(const mesh::BandPlan& plan)
{
    const auto& iso = band_isolation_filter(plan);
    auto c = dsp::cascade(iso, iso);
    const int d = plan.decimation();
    const auto& mf = shaping_filter(plan.samples_per_symbol);
    if (d == 1) return dsp::cascade(c, mf).taps;
    // Matched filter runs after decimation: upsample its taps onto the input grid.
    dsp::FirTapsd up;
    up.taps = Eigen::VectorXd::Zero((mf.size() - 1) * d + 1);
    for (Eigen::Index k = 0; k < mf.size(); ++k) up.taps[k * d] = mf.taps[k];
    return dsp::cascade(c, up).taps;
}

} // namespace

double mf_signal_power(const mesh::BandPlan& plan)
{
    const auto& tx = shaping_filter(plan.composite_oversampling);
    dsp::FirTapsd rx;
    rx.taps = rx_cascade(plan);
    const Eigen::VectorXd g = dsp::cascade(tx, rx).taps;
    // Cyclostationary average: each symbol contributes sum |g|^2 spread over sps samples.
    return g.squaredNorm() / plan.composite_oversampling;
}

double mf_noise_gain(const mesh::BandPlan& plan)
{
    const Eigen::VectorXd h = rx_cascade(plan);
    return h.squaredNorm();
}

double noise_power_for_snr(const mesh::BandPlan& plan, double snr_db)
{
    return mf_signal_power(plan) / (mf_noise_gain(plan) * std::pow(10.0, snr_db / 10.0));
}

dsp::SampleBlockd channelize(const dsp::SampleBlockd& rx, int band_index, const mesh::BandPlan& plan)
{
    Channelizer c(plan, band_index);
    return c.process(rx);
}

} // namespace rfmesh::modem
