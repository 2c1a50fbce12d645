#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rfmesh/channel/channel.hpp"
#include "rfmesh/mesh/band_plan.hpp"
#include "rfmesh/mesh/parallel.hpp"
#include "rfmesh/modem/receiver.hpp"
#include "rfmesh/modem/transmitter.hpp"

namespace rfmesh::mesh {

inline constexpr int kNodes = framing::kNodeCount;
inline constexpr int kLinks = kNodes * (kNodes - 1);

enum class PayloadSource : std::uint8_t { Prbs23, File, SyntheticVideo };
std::string_view to_string(PayloadSource s);
PayloadSource payload_source_from_string(std::string_view s);

struct NodeConfig {
    double gain = 1.0;
    framing::Modulation modulation = framing::Modulation::Qam16;
    framing::DiversityMode diversity_mode = framing::DiversityMode::Alamouti;
    PayloadSource payload_source = PayloadSource::Prbs23;
    std::string payload_file;
    int band = 0;

    bool operator==(const NodeConfig&) const = default;
};

struct LinkSnrOverride {
    int src = 0;
    int dst = 1;
    double snr_db = 0.0;
};

struct NetworkConfig {
    double symbol_rate = 24.96e6;         // real-unit symbol rate used for time and rate reporting
    bool real_rate_reporting = false;     // report rates in real units instead of per-symbol units
    channel::Profile profile = channel::Profile::AwgnOnly;
    double snr_db = 28.0;
    std::vector<LinkSnrOverride> link_snr;
    int payload_len = 4992;
    std::array<NodeConfig, kNodes> nodes{};
    std::uint64_t seed = 1;
    int quantum_samples = 8192;
    std::int64_t lead_in_samples = 8192;  // silence before the first frame (detector warm-up)
    std::int64_t due_margin_samples = 9216;
    double telemetry_period_s = 0.001;    // simulated seconds between snapshots
    bool concurrent = true;
    unsigned threads = 0;                 // 0: hardware concurrency
    modem::RxConfig rx;

    NetworkConfig();
};

enum class ControlType : std::uint8_t {
    SetGain, SetModulation, SetDiversity, SetSnr, SwapBands, SetBand, SetPayloadSource, Pause, Resume
};
std::string_view to_string(ControlType t);
std::optional<ControlType> control_type_from_string(std::string_view s);

struct ControlCommand {
    ControlType type = ControlType::SetGain;
    std::uint64_t command_id = 0;
    int node = -1;          // target node; SET_SNR: destination (-1 = all)
    int node_b = -1;        // SWAP_BANDS partner
    int src = -1;           // SET_SNR source (-1 = all)
    double number = 0.0;    // gain, SNR dB, band index
    std::string text;       // modulation, diversity or payload source name
};

struct ControlAck {
    std::uint64_t command_id = 0;
    bool ok = false;
    std::string reason;
    std::uint64_t winning_command_id = 0;
    std::int64_t effective_index = 0;     // composite sample index where the change applies
};

struct LinkSnapshot {
    int src = 0;
    int dst = 0;
    int band = 0;
    modem::LinkMetrics metrics;
    double delivered_bps = 0.0;           // all good frames heard on this link
    double addressed_bps = 0.0;           // good frames addressed to dst
    double period_ber = 0.0;
    double period_fer = 0.0;
    std::vector<modem::cd> constellation; // <= 512 points from the last period
};

struct NodeSnapshot {
    int node = 0;
    NodeConfig config;
    std::uint64_t frames_sent = 0;
};

struct NetworkSnapshot {
    double timestamp = 0.0;               // simulated seconds
    std::int64_t sample_index = 0;
    std::array<LinkSnapshot, kLinks> links;
    std::array<NodeSnapshot, kNodes> nodes;
    double aggregate_throughput_bps = 0.0;
    double aggregate_addressed_bps = 0.0;
    double line_rate_bps = 0.0;           // per link
    double aggregate_line_rate_bps = 0.0;
    double occupied_bw_hz = 0.0;
    double framing_efficiency = 0.0;
    bool real_units = false;
};

/// Record of one transmitted frame, used for FER deadlines.
struct TxFrameRecord {
    int src = 0;
    int dst = 0;
    std::uint32_t seq = 0;
    int band = 0;
    std::int64_t start = 0;
    std::int64_t end = 0;                 // one past the last shaped sample
    std::uint32_t payload_bits = 0;
    std::array<bool, kNodes> delivered{};
};

/// Index of directed link (src, dst) in [0, 12), ordered by src then dst.
int link_index(int src, int dst);
std::pair<int, int> link_nodes(int index);

/// Four-node FDMA mesh: every node transmits back-to-back frames in its band,
/// round-robin over its three destinations; every node decodes the other three
/// bands. Time advances in quanta that also break at telemetry ticks and
/// scheduled channel changes, so results do not depend on threading.
class NetworkSimulator {
public:
    explicit NetworkSimulator(NetworkConfig cfg);
    ~NetworkSimulator();

    /// Advance to `sample_index`, calling on_snapshot at every telemetry tick.
    void run_until(std::int64_t sample_index, const std::function<void(const NetworkSnapshot&)>& on_snapshot = {});
    void run_for(double seconds, const std::function<void(const NetworkSnapshot&)>& on_snapshot = {});
    /// Advance by exactly one quantum (or to the next break point).
    void step(const std::function<void(const NetworkSnapshot&)>& on_snapshot = {});

    /// Validate and schedule a batch of commands. Within a batch, commands are
    /// ordered by command_id and the last one per target wins.
    std::vector<ControlAck> apply_controls(std::vector<ControlCommand> batch);
    ControlAck apply_control(const ControlCommand& cmd);

    NetworkSnapshot snapshot() const;

    std::int64_t sample_index() const { return now_; }
    double seconds() const;
    std::int64_t samples_for(double seconds) const;
    std::int64_t telemetry_period_samples() const { return tick_; }
    std::int64_t frame_period_samples(int node) const;
    const NetworkConfig& config() const { return cfg_; }
    const BandPlan& band_plan() const { return plan_; }
    /// Current band of every node (a permutation of 0..3).
    std::array<int, kNodes> band_assignment() const;
    const std::deque<TxFrameRecord>& frame_log() const { return retired_; }
    bool paused() const { return paused_; }
    void keep_frame_log(bool on) { keep_log_ = on; }
    const modem::LinkReceiver& receiver(int src, int dst) const;

private:
    struct Node;
    struct Link;
    struct MediumEvent {
        std::int64_t at = 0;
        int src = 0;
        int dst = 0;
        double snr_db = 0.0;
    };

    void render_until(Node& node, std::int64_t index);
    void render_frame(Node& node);
    framing::ByteVector next_payload(Node& node, int dst, std::uint32_t seq);
    void assemble_tx(Node& node, std::int64_t start, int len, std::array<dsp::SampleBlockd, 2>& out);
    void retire_due(std::int64_t processed);
    void emit_snapshot(const std::function<void(const NetworkSnapshot&)>& on_snapshot);
    std::optional<std::string> validate(const ControlCommand& cmd) const;
    std::int64_t next_break() const;

    NetworkConfig cfg_;
    BandPlan plan_;
    double base_snr_db_ = 0.0;
    std::vector<std::unique_ptr<Node>> nodes_;
    std::vector<std::unique_ptr<Link>> links_;     // index by link_index
    std::unique_ptr<channel::Medium> medium_;
    std::unique_ptr<WorkerPool> pool_;
    std::vector<MediumEvent> medium_events_;

    std::int64_t now_ = 0;
    std::int64_t tick_ = 0;
    std::int64_t next_tick_ = 0;
    std::int64_t limit_ = std::numeric_limits<std::int64_t>::max();
    std::deque<TxFrameRecord> pending_;            // transmitted, decode deadline not reached
    std::deque<TxFrameRecord> retired_;
    std::map<std::tuple<int, int, std::uint32_t>, std::size_t> pending_lookup_;
    std::uint64_t pending_base_ = 0;               // absolute position of pending_.front()
    bool keep_log_ = false;
    bool paused_ = false;
    NetworkSnapshot last_snapshot_;
};

/// Build a simulator and run it for `seconds` of simulated time.
std::vector<NetworkSnapshot> step_network(double seconds, const NetworkConfig& cfg);

} // namespace rfmesh::mesh
