#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "rfmesh/framing/frame.hpp"
#include "rfmesh/modem/detector.hpp"
#include "rfmesh/modem/estimation.hpp"

namespace rfmesh::modem {

enum class FrameOutcome : std::uint8_t { Degenerate, HeaderFailed, Decoded };

/// Everything one receiver learned about one detected frame.
struct FrameReport {
    DetectionResult detection;
    FrameOutcome outcome = FrameOutcome::HeaderFailed;
    framing::FrameDescriptor descriptor;   // valid when outcome == Decoded
    framing::ByteVector payload;
    std::int64_t end_index = 0;            // matched-filter index one past the last symbol
    ChannelEstimate channel;

    bool ber_valid = false;                // PRBS payload: bit errors are exact
    std::uint64_t payload_bits = 0;
    std::uint64_t bit_errors = 0;

    // Data-aided EVM sums over training B and pilots.
    double evm_ref_power = 0.0;
    double evm_pre_error = 0.0;
    double evm_post_error = 0.0;

    // Gated matched-filter powers per RX antenna.
    bool sinr_available = false;
    std::array<double, 2> gate_on{};
    std::array<double, 2> gate_off{};

    std::vector<cd> scatter;               // decimated equalized data symbols
};

/// Strongest-branch gated SINR: max over antennas of (on - off) / off,
/// numerator clamped at zero, linear result clamped to [1e-10, 1e10].
double gated_sinr(const std::array<double, 2>& on, const std::array<double, 2>& off);
double to_db(double linear);

/// Running link metrics. Counters only grow; ratios are cumulative over the
/// link's lifetime, the last_* fields describe the most recent decoded frame.
struct LinkMetrics {
    double evm_rms_pct = 0.0;
    double evm_pre_pct = 0.0;
    double sinr_db = 0.0;
    bool sinr_available = false;
    double ber = 0.0;
    double fer = 0.0;

    std::uint64_t frames_detected = 0;
    std::uint64_t frames_header_ok = 0;
    std::uint64_t frames_crc_ok = 0;
    std::uint64_t frames_expected = 0;   // transmitted frames whose decode deadline has passed
    std::uint64_t frames_lost = 0;       // of those, not delivered with a good CRC
    std::uint64_t payload_bits = 0;
    std::uint64_t bit_errors = 0;
    std::uint64_t bytes_delivered = 0;

    double last_evm_pct = 0.0;
    double last_sinr_db = 0.0;
    double last_signal_power = 0.0;

    double evm_ref_sum = 0.0;
    double evm_pre_sum = 0.0;
    double evm_post_sum = 0.0;
    std::array<double, 2> gate_on_sum{};
    std::array<double, 2> gate_off_sum{};

    void add(const FrameReport& r);
    /// fer = frames_lost / frames_expected when expectations are tracked,
    /// otherwise the CRC failure fraction of detected frames.
    void update_fer();
};

} // namespace rfmesh::modem
