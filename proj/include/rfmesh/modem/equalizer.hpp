#pragma once

#include <span>
#include <vector>

#include "rfmesh/dsp/types.hpp"
#include "rfmesh/framing/frame.hpp"

namespace rfmesh::modem {

using cd = std::complex<double>;

struct EqualizerConfig {
    int taps = 9;
    double mu = 0.01;
    double epsilon = 1e-9;   // regularizes the NLMS normalization
    int warmup_symbols = 64;

    int delay() const { return (taps - 1) / 2; }
    void validate() const;
};

/// Symbol-spaced transversal NLMS filter. filter() pushes one input and
/// returns w^T [x_n, x_{n-1}, ..., x_{n-N+1}]; adapt() updates the taps for
/// the most recent output.
class LmsEqualizer {
public:
    explicit LmsEqualizer(EqualizerConfig cfg = {});

    cd filter(cd x);
    void adapt(cd output, cd desired);
    void reset();

    const dsp::CVector<double>& taps() const { return w_; }
    const EqualizerConfig& config() const { return cfg_; }

private:
    EqualizerConfig cfg_;
    dsp::CVector<double> w_;
    dsp::CVector<double> x_;   // x_[0] is the newest input
};

enum class ReferenceKind : std::uint8_t { Known, Decision, None };

struct EqualizerReference {
    ReferenceKind kind = ReferenceKind::Decision;
    cd value{};   // used when kind == Known
};

struct EqualizerOutput {
    std::vector<cd> symbols;     // symbols[n] estimates input[n - delay]
    std::vector<bool> warmup;    // true for the first warmup_symbols outputs
};

/// Run the NLMS equalizer over a stream. reference[n] is the desired value for
/// output n (input symbol n - delay); decision references slice with `mod`.
EqualizerOutput equalize_lms(std::span<const cd> input, std::span<const EqualizerReference> reference,
                             const EqualizerConfig& cfg, framing::Modulation mod, LmsEqualizer* state = nullptr);

} // namespace rfmesh::modem
