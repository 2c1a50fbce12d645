#include "rfmesh/mesh/band_plan.hpp"

#include "rfmesh/errors.hpp"

namespace rfmesh::mesh {

double BandPlan::center_normalized(int band) const
{
    if (band < 0 || band >= band_count()) throw ParameterError("BandPlan: band index out of range");
    return band_centers[static_cast<std::size_t>(band)] / composite_rate;
}

BandPlan build_band_plan(double symbol_rate)
{
    if (!(symbol_rate > 0.0)) throw ParameterError("build_band_plan: symbol_rate must be positive");
    BandPlan p;
    p.symbol_rate = symbol_rate;
    p.roll_off = 0.5;
    p.composite_oversampling = 8;
    p.samples_per_symbol = 8;
    p.composite_rate = 8.0 * symbol_rate;
    p.band_centers = {-2.8125 * symbol_rate, -0.9375 * symbol_rate, 0.9375 * symbol_rate, 2.8125 * symbol_rate};
    p.occupied_bw = (1.0 + p.roll_off) * symbol_rate;
    p.band_spacing = 1.875 * symbol_rate;
    p.guard_bw = p.band_spacing - p.occupied_bw;
    p.outer_edge = p.band_centers[3] + 0.5 * p.occupied_bw;
    p.nyquist = 0.5 * p.composite_rate;
    p.isolation_passband = 0.5 * p.occupied_bw;
    p.isolation_stopband = p.band_spacing - 0.5 * p.occupied_bw;
    p.isolation_atten_db = 40.0;
    return p;
}

} // namespace rfmesh::mesh
