#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include "rfmesh/runtime/scenario.hpp"

namespace rfmesh::runtime {

struct BerPoint {
    double es_n0_db = 0.0;
    double ber = 0.0;
    std::uint64_t bits = 0;
    std::uint64_t bit_errors = 0;
    double ber_theory = 0.0;
    double std_err = 0.0;   // standard error of `ber`, from per-symbol error counts
};

/// Monte-Carlo uncoded Gray 16-QAM over a single-branch complex AWGN channel,
/// hard-decision demapping. Each point draws at least `bits_per_point` bits
/// from its own stream so points are independent and reproducible.
std::vector<BerPoint> ber_sweep(const SweepSettings& settings, std::uint64_t seed);

/// Whitespace-separated table: es_n0_db ber bits ber_theory std_err.
void write_ber_table(std::ostream& os, const std::vector<BerPoint>& points);

} // namespace rfmesh::runtime
