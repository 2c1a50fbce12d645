#include "rfmesh/modem/constellation.hpp"

#include <cmath>

#include "rfmesh/errors.hpp"

namespace rfmesh::modem {
namespace {

const double kQam16Scale = 1.0 / std::sqrt(10.0);

double pam4_level(std::uint8_t hi, std::uint8_t lo)
{
    // 00 -> -3, 01 -> -1, 11 -> +1, 10 -> +3
    if (!hi) return lo ? -1.0 : -3.0;
    return lo ? 1.0 : 3.0;
}

void pam4_bits(double x, std::uint8_t& hi, std::uint8_t& lo)
{
    if (x <= -2.0) { hi = 0; lo = 0; }
    else if (x <= 0.0) { hi = 0; lo = 1; }
    else if (x < 2.0) { hi = 1; lo = 1; }
    else { hi = 1; lo = 0; }
}

double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

} // namespace

std::vector<cd> map_qam16_gray(std::span<const std::uint8_t> bits)
{
    if (bits.size() % 4 != 0) throw ParameterError("map_qam16_gray: bit count must be divisible by 4");
    std::vector<cd> out(bits.size() / 4);
    for (std::size_t k = 0; k < out.size(); ++k) {
        const auto* b = &bits[4 * k];
        out[k] = cd(pam4_level(b[0], b[1]), pam4_level(b[2], b[3])) * kQam16Scale;
    }
    return out;
}

framing::BitVector demap_qam16_gray(std::span<const cd> symbols)
{
    framing::BitVector bits(symbols.size() * 4);
    for (std::size_t k = 0; k < symbols.size(); ++k) {
        const cd s = symbols[k] / kQam16Scale;
        pam4_bits(s.real(), bits[4 * k], bits[4 * k + 1]);
        pam4_bits(s.imag(), bits[4 * k + 2], bits[4 * k + 3]);
    }
    return bits;
}

std::vector<cd> map_qpsk(std::span<const std::uint8_t> bits)
{
    if (bits.size() % 2 != 0) throw ParameterError("map_qpsk: bit count must be even");
    std::vector<cd> out(bits.size() / 2);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = framing::qpsk_point(bits[2 * k], bits[2 * k + 1]);
    return out;
}

framing::BitVector demap_qpsk(std::span<const cd> symbols)
{
    framing::BitVector bits(symbols.size() * 2);
    for (std::size_t k = 0; k < symbols.size(); ++k) {
        bits[2 * k] = symbols[k].real() > 0.0 ? 1 : 0;
        bits[2 * k + 1] = symbols[k].imag() > 0.0 ? 1 : 0;
    }
    return bits;
}

std::vector<cd> map_bits(std::span<const std::uint8_t> bits, framing::Modulation m)
{
    return m == framing::Modulation::Qpsk ? map_qpsk(bits) : map_qam16_gray(bits);
}

framing::BitVector demap_symbols(std::span<const cd> symbols, framing::Modulation m)
{
    return m == framing::Modulation::Qpsk ? demap_qpsk(symbols) : demap_qam16_gray(symbols);
}

cd slice(cd s, framing::Modulation m)
{
    if (m == framing::Modulation::Qpsk) {
        const double a = 1.0 / std::sqrt(2.0);
        return {s.real() > 0.0 ? a : -a, s.imag() > 0.0 ? a : -a};
    }
    std::uint8_t hi = 0;
    std::uint8_t lo = 0;
    const cd u = s / kQam16Scale;
    pam4_bits(u.real(), hi, lo);
    const double i = pam4_level(hi, lo);
    pam4_bits(u.imag(), hi, lo);
    const double q = pam4_level(hi, lo);
    return cd(i, q) * kQam16Scale;
}

double qam16_gray_ber(double es_n0)
{
    const double a = std::sqrt(es_n0 / 5.0);
    return (3.0 * q_function(a) + 2.0 * q_function(3.0 * a) - q_function(5.0 * a)) / 4.0;
}

} // namespace rfmesh::modem
