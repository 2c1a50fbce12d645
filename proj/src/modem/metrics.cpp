#include "rfmesh/modem/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace rfmesh::modem {

double to_db(double linear)
{
    return 10.0 * std::log10(linear);
}

double gated_sinr(const std::array<double, 2>& on, const std::array<double, 2>& off)
{
    double best = 0.0;
    for (std::size_t i = 0; i < 2; ++i) {
        const double num = std::max(on[i] - off[i], 0.0);
        const double s = off[i] > 0.0 ? num / off[i] : (num > 0.0 ? 1e10 : 0.0);
        best = std::max(best, s);
    }
    return std::clamp(best, 1e-10, 1e10);
}

void LinkMetrics::add(const FrameReport& r)
{
    ++frames_detected;
    if (r.outcome != FrameOutcome::Decoded) {
        update_fer();
        return;
    }
    ++frames_header_ok;
    if (r.descriptor.payload_crc_ok) {
        ++frames_crc_ok;
        bytes_delivered += r.payload.size();
    }
    if (r.ber_valid) {
        payload_bits += r.payload_bits;
        bit_errors += r.bit_errors;
        ber = payload_bits ? static_cast<double>(bit_errors) / static_cast<double>(payload_bits) : 0.0;
    }
    evm_ref_sum += r.evm_ref_power;
    evm_pre_sum += r.evm_pre_error;
    evm_post_sum += r.evm_post_error;
    if (evm_ref_sum > 0.0) {
        evm_rms_pct = 100.0 * std::sqrt(evm_post_sum / evm_ref_sum);
        evm_pre_pct = 100.0 * std::sqrt(evm_pre_sum / evm_ref_sum);
    }
    if (r.evm_ref_power > 0.0) last_evm_pct = 100.0 * std::sqrt(r.evm_post_error / r.evm_ref_power);
    if (r.sinr_available) {
        for (std::size_t i = 0; i < 2; ++i) {
            gate_on_sum[i] += r.gate_on[i];
            gate_off_sum[i] += r.gate_off[i];
        }
        sinr_available = true;
        sinr_db = to_db(gated_sinr(gate_on_sum, gate_off_sum));
        last_sinr_db = to_db(gated_sinr(r.gate_on, r.gate_off));
        last_signal_power = std::max(r.gate_on[0] - r.gate_off[0], r.gate_on[1] - r.gate_off[1]);
    }
    update_fer();
}

void LinkMetrics::update_fer()
{
    if (frames_expected > 0) {
        fer = static_cast<double>(frames_lost) / static_cast<double>(frames_expected);
        return;
    }
    fer = frames_detected ? 1.0 - static_cast<double>(frames_crc_ok) / static_cast<double>(frames_detected) : 0.0;
}

} // namespace rfmesh::modem
