#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>

#include <json.hpp>

#include "rfmesh/mesh/network.hpp"
#include "rfmesh/runtime/scenario.hpp"

namespace rfmesh::runtime {

// Line-delimited JSON records shared by the snapshot log, the summary file and
// the telemetry/control socket protocol. See docs/protocol.md.

nlohmann::json snapshot_record(const mesh::NetworkSnapshot& s);
nlohmann::json constellation_record(const mesh::NetworkSnapshot& s);
nlohmann::json event_record(double timestamp, const std::string& event, nlohmann::json fields = nlohmann::json::object());
nlohmann::json ack_record(const mesh::ControlAck& ack, double sample_rate);
nlohmann::json nack_record(std::optional<std::uint64_t> command_id, const std::string& reason);

/// Final summary. Only depends on the simulated results and the parts of the
/// scenario that affect them, so repeated runs produce identical bytes.
nlohmann::json summary_record(const ScenarioConfig& scenario, const mesh::NetworkSnapshot& last, bool complete);

struct ControlParseError {
    std::optional<std::uint64_t> command_id;   // echoed when the record carried one
    std::string reason;
};

/// Parse one control line such as
///   {"type":"set_gain","command_id":7,"target":{"node":2},"value":0.5}
/// Targets: {"node":n}, {"nodes":[a,b]} for swap_bands, {"link":[src,dst]} for set_snr.
/// A bare integer target is read as {"node":n}. Unknown fields are ignored.
std::variant<mesh::ControlCommand, ControlParseError> parse_control(const std::string& line);
nlohmann::json control_record(const mesh::ControlCommand& cmd);

/// Compact single-line dump with a trailing newline.
std::string to_line(const nlohmann::json& j);

} // namespace rfmesh::runtime
