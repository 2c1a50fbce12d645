#include "rfmesh/runtime/sweep.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <random>

#include "rfmesh/modem/constellation.hpp"

namespace rfmesh::runtime {

std::vector<BerPoint> ber_sweep(const SweepSettings& settings, std::uint64_t seed)
{
    constexpr std::size_t kChunk = 4096;   // symbols per batch
    std::vector<BerPoint> out;
    for (std::size_t p = 0; p < settings.es_n0_db.size(); ++p) {
        BerPoint pt;
        pt.es_n0_db = settings.es_n0_db[p];
        const double es_n0 = std::pow(10.0, pt.es_n0_db / 10.0);
        const double sigma = std::sqrt(0.5 / es_n0);   // per real dimension, Es = 1
        std::seed_seq ss{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                         static_cast<std::uint32_t>(0x5EE9), static_cast<std::uint32_t>(p)};
        std::mt19937_64 rng(ss);
        std::normal_distribution<double> noise(0.0, sigma);

        const std::uint64_t symbols = (settings.bits_per_point + 3) / 4;
        std::array<std::uint64_t, 5> hist{};   // symbols with 0..4 bit errors
        framing::BitVector bits(kChunk * 4);
        for (std::uint64_t done = 0; done < symbols;) {
            const std::size_t n = static_cast<std::size_t>(std::min<std::uint64_t>(kChunk, symbols - done));
            bits.resize(n * 4);
            for (std::size_t k = 0; k < n; ++k) {
                const auto word = rng();
                for (std::size_t b = 0; b < 4; ++b) bits[4 * k + b] = static_cast<std::uint8_t>((word >> b) & 1u);
            }
            auto sym = modem::map_qam16_gray(bits);
            for (auto& s : sym) s += modem::cd(noise(rng), noise(rng));
            const auto rx = modem::demap_qam16_gray(sym);
            for (std::size_t k = 0; k < n; ++k) {
                int e = 0;
                for (std::size_t b = 0; b < 4; ++b) e += rx[4 * k + b] != bits[4 * k + b];
                ++hist[static_cast<std::size_t>(e)];
            }
            done += n;
        }

        double s1 = 0.0;
        double s2 = 0.0;
        for (std::size_t e = 0; e < hist.size(); ++e) {
            s1 += static_cast<double>(e * hist[e]);
            s2 += static_cast<double>(e * e * hist[e]);
        }
        const double ns = static_cast<double>(symbols);
        const double mean = s1 / ns;
        const double var = std::max(0.0, s2 / ns - mean * mean) * ns / std::max(1.0, ns - 1.0);
        pt.bits = symbols * 4;
        pt.bit_errors = static_cast<std::uint64_t>(s1);
        pt.ber = mean / 4.0;
        pt.std_err = std::sqrt(var / ns) / 4.0;
        pt.ber_theory = modem::qam16_gray_ber(es_n0);
        out.push_back(pt);
    }
    return out;
}

void write_ber_table(std::ostream& os, const std::vector<BerPoint>& points)
{
    os << "# es_n0_db ber bits ber_theory std_err\n";
    char line[160];
    for (const auto& p : points) {
        std::snprintf(line, sizeof line, "%.2f %.6e %llu %.6e %.3e\n", p.es_n0_db, p.ber,
                      static_cast<unsigned long long>(p.bits), p.ber_theory, p.std_err);
        os << line;
    }
}

} // namespace rfmesh::runtime
