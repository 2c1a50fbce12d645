#pragma once

#include <complex>
#include <span>
#include <vector>

#include "rfmesh/framing/bits.hpp"
#include "rfmesh/framing/frame.hpp"

namespace rfmesh::modem {

using cd = std::complex<double>;

/// Gray 16-QAM, unit average power. Each nibble b3 b2 b1 b0: b3 b2 selects I,
/// b1 b0 selects Q, with 00 -> -3, 01 -> -1, 11 -> +1, 10 -> +3, scaled by 1/sqrt(10).
std::vector<cd> map_qam16_gray(std::span<const std::uint8_t> bits);

/// Hard minimum-distance decisions. A sample exactly on a decision boundary
/// resolves to the lower Gray label: -2 -> 00, 0 -> 01, +2 -> 10 (per axis).
framing::BitVector demap_qam16_gray(std::span<const cd> symbols);

std::vector<cd> map_qpsk(std::span<const std::uint8_t> bits);
/// Ties at zero resolve to bit 0.
framing::BitVector demap_qpsk(std::span<const cd> symbols);

std::vector<cd> map_bits(std::span<const std::uint8_t> bits, framing::Modulation m);
framing::BitVector demap_symbols(std::span<const cd> symbols, framing::Modulation m);

/// Nearest constellation point (same tie rule as the demappers).
cd slice(cd symbol, framing::Modulation m);

/// Exact Gray 16-QAM bit error probability over AWGN at Es/N0 (linear):
/// (3 Q(a) + 2 Q(3a) - Q(5a)) / 4 with a = sqrt(Es / (5 N0)).
double qam16_gray_ber(double es_n0);

} // namespace rfmesh::modem
