#pragma once

#include <array>

#include "rfmesh/framing/frame.hpp"

namespace rfmesh::mesh {

/// FDMA plan for the shared composite band. Frequencies are kept in units of
/// the symbol rate; `*_normalized` helpers convert to cycles per composite sample.
struct BandPlan {
    double symbol_rate = 1.0;               // symbols/s (1.0 for normalized runs)
    double roll_off = 0.5;
    int composite_oversampling = 8;          // composite_rate / symbol_rate
    int samples_per_symbol = 8;              // channelizer output rate / symbol_rate
    double composite_rate = 8.0;             // samples/s
    std::array<double, 4> band_centers{};    // Hz
    double occupied_bw = 1.5;                // Hz, (1 + roll_off) * symbol_rate
    double band_spacing = 1.875;             // Hz between adjacent centers
    double guard_bw = 0.375;                 // band_spacing - occupied_bw
    double outer_edge = 3.5625;              // Hz, outermost occupied frequency
    double nyquist = 4.0;                    // composite_rate / 2
    double isolation_passband = 0.75;        // Hz, low-pass passband edge
    double isolation_stopband = 1.125;       // Hz, low-pass stopband edge
    double isolation_atten_db = 40.0;        // per cascaded stage

    int band_count() const { return static_cast<int>(band_centers.size()); }
    double center_normalized(int band) const;
    double passband_edge_normalized() const { return isolation_passband / composite_rate; }
    double stopband_edge_normalized() const { return isolation_stopband / composite_rate; }
    int decimation() const { return composite_oversampling / samples_per_symbol; }
    double line_rate_bps(framing::Modulation m) const { return framing::bits_per_symbol(m) * symbol_rate; }
};

/// Default plan: centers at {-2.8125, -0.9375, +0.9375, +2.8125} x symbol_rate.
BandPlan build_band_plan(double symbol_rate);

} // namespace rfmesh::mesh
