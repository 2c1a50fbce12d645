#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "rfmesh/dsp/types.hpp"
#include "rfmesh/framing/frame.hpp"
#include "rfmesh/mesh/band_plan.hpp"

namespace rfmesh::channel {

using cd = std::complex<double>;
inline constexpr int kNodes = framing::kNodeCount;

enum class Profile : std::uint8_t { Ideal, AwgnOnly, MultipathLight, Mobile };
std::string_view to_string(Profile p);
Profile profile_from_string(std::string_view s);   // throws ParameterError

enum class StreamKind : std::uint8_t { Noise = 0, Fading = 1, Payload = 2 };

/// Independent generator per (seed, kind, node); distinct ids never share state.
class RngStream {
public:
    RngStream(std::uint64_t seed, StreamKind kind, int node);
    std::mt19937_64& engine() { return eng_; }
    std::uint64_t seed() const { return seed_; }
    StreamKind kind() const { return kind_; }
    int node() const { return node_; }

private:
    std::uint64_t seed_;
    StreamKind kind_;
    int node_;
    std::mt19937_64 eng_;
};

/// One directed node pair. taps[i][j] maps TX antenna j to RX antenna i.
struct PathRealization {
    std::array<std::array<std::vector<cd>, 2>, 2> taps;
    int delay_samples = 0;
    double cfo_normalized = 0.0;             // cycles per composite sample
    std::vector<double> tap_rotation;        // cycles per composite sample, one per tap index
    double amplitude = 1.0;                  // extra path gain (per-link SNR override)
};

struct ChannelRealization {
    Profile profile = Profile::Ideal;
    std::array<std::array<PathRealization, kNodes>, kNodes> paths;   // [src][dst], diagonal unused
    std::array<double, kNodes> noise_power{};                        // per destination, per complex sample

    const PathRealization& path(int src, int dst) const { return paths[static_cast<std::size_t>(src)][static_cast<std::size_t>(dst)]; }
    PathRealization& path(int src, int dst) { return paths[static_cast<std::size_t>(src)][static_cast<std::size_t>(dst)]; }
};

/// Multipath power profile in dB and the largest random propagation delay.
inline constexpr std::array<double, 3> kMultipathProfileDb{0.0, -9.0, -18.0};
inline constexpr int kMaxDelaySamples = 15;
/// MOBILE: |CFO| up to 1e-4 cycles per symbol; taps rotate at up to 1e-6 cycles per sample.
inline constexpr double kMobileMaxCfoPerSymbol = 1e-4;
inline constexpr double kMobileTapRotation = 1e-6;

/// Draw a realization for all 12 directed pairs. Noise is calibrated so a
/// unit-power, unit-gain transmission reaches `snr_db` at the matched filter.
/// Fading draws come from `fading` (one stream per source node, seeded from
/// `seed`), so realizations are reproducible.
ChannelRealization make_realization(Profile profile, double snr_db, std::uint64_t seed, const mesh::BandPlan& plan);

/// Scale one path so its link SNR becomes `snr_db` against the destination's
/// calibrated noise floor `base_snr_db`.
void set_link_snr(ChannelRealization& r, int src, int dst, double snr_db, double base_snr_db);

using NodeWaveforms = std::array<std::array<dsp::SampleBlockd, 2>, kNodes>;

/// Stateful shared medium. Blocks from all nodes must be aligned and
/// contiguous across calls; each RX antenna receives the sum over every other
/// node and both of its antennas of delay -> taps -> CFO, plus Gaussian noise
/// drawn from that node's noise stream. A node never hears itself.
class Medium {
public:
    Medium(ChannelRealization realization, std::uint64_t seed);

    NodeWaveforms propagate(const NodeWaveforms& tx);
    /// Receive side for one destination (callable concurrently for distinct nodes
    /// once commit() has not yet been called for the current quantum).
    std::array<dsp::SampleBlockd, 2> receive(const NodeWaveforms& tx, int dst);
    /// Advance the TX history after every destination has received the quantum.
    void commit(const NodeWaveforms& tx);

    const ChannelRealization& realization() const { return real_; }
    void set_realization(ChannelRealization r);
    void set_noise_enabled(bool on) { noise_on_ = on; }

private:
    ChannelRealization real_;
    std::array<RngStream, kNodes> noise_rng_;
    std::array<std::array<std::vector<cd>, 2>, kNodes> history_;   // last `hist_len_` TX samples
    int hist_len_ = 0;
    bool noise_on_ = true;
    std::int64_t next_index_ = 0;
    bool started_ = false;
};

/// Stateless convenience: one aligned block through a fresh medium.
NodeWaveforms propagate(const NodeWaveforms& tx, const ChannelRealization& realization, std::uint64_t seed);

} // namespace rfmesh::channel
