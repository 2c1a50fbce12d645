#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "rfmesh/framing/frame.hpp"

namespace rfmesh::modem {

using cd = std::complex<double>;

struct ChannelEstimate {
    Eigen::Matrix2cd h = Eigen::Matrix2cd::Zero();  // h(i, j): TX antenna j -> RX antenna i
    double dominant_tap_mag = 0.0;                  // before normalization
    std::int64_t timestamp = 0;                     // symbol index of the first training symbol
};

inline constexpr double kDegenerateTap = 1e-6;

/// Least-squares correlator over each antenna's dedicated training interval.
/// `rx_a[i]` / `rx_b[i]` are RX antenna i's symbol-rate samples during the
/// training A / B intervals. The result is scaled so max |h(i, j)| = 1; throws
/// DegenerateChannelError when the raw dominant tap is below 1e-6.
ChannelEstimate estimate_channel(const std::array<std::span<const cd>, 2>& rx_a,
                                 const std::array<std::span<const cd>, 2>& rx_b,
                                 const framing::TrainingSequences& training);

/// Single-column MRC of one symbol: (conj(h0j) y0 + conj(h1j) y1) / (|h0j|^2 + |h1j|^2).
cd mrc_symbol(const Eigen::Matrix2cd& h, int tx_antenna, cd y0, cd y1);

/// Alamouti combining of one symbol pair received as r(i, t), t = 0, 1.
/// Returns (s1, s2) normalized by the sum of all |h(i, j)|^2.
std::array<cd, 2> alamouti_pair(const Eigen::Matrix2cd& h, const std::array<cd, 2>& r0, const std::array<cd, 2>& r1);

struct CombineResult {
    std::vector<cd> symbols;
    double snr_gain = 0.0;   // post-combining SNR over a unit-SNR single branch
};

/// Combine two RX streams. SINGLE_TX_MRC uses column 0 of h; ALAMOUTI combines
/// consecutive pairs (stream length must be even). Throws DegenerateChannelError
/// on a zero-norm channel.
CombineResult combine_mrc(std::span<const cd> y0, std::span<const cd> y1, const ChannelEstimate& est,
                          framing::DiversityMode mode);

} // namespace rfmesh::modem
