#include "rfmesh/modem/equalizer.hpp"

#include "rfmesh/errors.hpp"
#include "rfmesh/modem/constellation.hpp"

namespace rfmesh::modem {

void EqualizerConfig::validate() const
{
    if (taps < 1 || taps % 2 == 0) throw ParameterError("EqualizerConfig: taps must be odd and positive");
    if (!(mu >= 0.0) || mu > 2.0) throw ParameterError("EqualizerConfig: mu must lie in [0, 2]");
    if (warmup_symbols < 0) throw ParameterError("EqualizerConfig: warmup_symbols must be non-negative");
}

LmsEqualizer::LmsEqualizer(EqualizerConfig cfg)
    : cfg_(cfg)
{
    cfg_.validate();
    reset();
}

void LmsEqualizer::reset()
{
    w_ = dsp::CVector<double>::Zero(cfg_.taps);
    w_[cfg_.delay()] = 1.0;
    x_ = dsp::CVector<double>::Zero(cfg_.taps);
}

cd LmsEqualizer::filter(cd x)
{
    for (Eigen::Index k = x_.size() - 1; k > 0; --k) x_[k] = x_[k - 1];
    x_[0] = x;
    return (w_.transpose() * x_)(0);
}

void LmsEqualizer::adapt(cd output, cd desired)
{
    if (cfg_.mu == 0.0) return;
    const cd e = desired - output;
    const double p = x_.squaredNorm() + cfg_.epsilon;
    w_ += (cfg_.mu / p) * e * x_.conjugate();
}

EqualizerOutput equalize_lms(std::span<const cd> input, std::span<const EqualizerReference> reference,
                             const EqualizerConfig& cfg, framing::Modulation mod, LmsEqualizer* state)
{
    if (reference.size() != input.size()) throw ContractError("equalize_lms: reference length mismatch");
    LmsEqualizer local(cfg);
    LmsEqualizer& eq = state ? *state : local;
    EqualizerOutput out;
    out.symbols.resize(input.size());
    out.warmup.resize(input.size());
    for (std::size_t n = 0; n < input.size(); ++n) {
        const cd y = eq.filter(input[n]);
        out.symbols[n] = y;
        out.warmup[n] = n < static_cast<std::size_t>(cfg.warmup_symbols);
        const auto& r = reference[n];
        if (r.kind == ReferenceKind::Known) eq.adapt(y, r.value);
        else if (r.kind == ReferenceKind::Decision) eq.adapt(y, slice(y, mod));
    }
    return out;
}

} // namespace rfmesh::modem
