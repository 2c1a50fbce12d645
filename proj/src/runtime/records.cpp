#include "rfmesh/runtime/records.hpp"

#include <cmath>

namespace rfmesh::runtime {

using nlohmann::json;

namespace {

json link_json(const mesh::LinkSnapshot& l)
{
    const auto& m = l.metrics;
    return {
        {"src", l.src},
        {"dst", l.dst},
        {"band", l.band},
        {"evm_pct", m.evm_rms_pct},
        {"evm_pre_pct", m.evm_pre_pct},
        {"sinr_db", m.sinr_available ? json(m.sinr_db) : json(nullptr)},
        {"ber", m.ber},
        {"fer", m.fer},
        {"period_ber", l.period_ber},
        {"period_fer", l.period_fer},
        {"frames_detected", m.frames_detected},
        {"frames_header_ok", m.frames_header_ok},
        {"frames_crc_ok", m.frames_crc_ok},
        {"frames_expected", m.frames_expected},
        {"frames_lost", m.frames_lost},
        {"payload_bits", m.payload_bits},
        {"bit_errors", m.bit_errors},
        {"bytes_delivered", m.bytes_delivered},
        {"last_evm_pct", m.last_evm_pct},
        {"last_sinr_db", m.last_sinr_db},
        {"last_signal_power", m.last_signal_power},
        {"delivered_bps", l.delivered_bps},
        {"addressed_bps", l.addressed_bps},
    };
}

json node_json(const mesh::NodeSnapshot& n)
{
    return {
        {"node", n.node},
        {"band", n.config.band},
        {"gain", n.config.gain},
        {"modulation", framing::to_string(n.config.modulation)},
        {"diversity_mode", framing::to_string(n.config.diversity_mode)},
        {"payload_source", mesh::to_string(n.config.payload_source)},
        {"frames_sent", n.frames_sent},
    };
}

json rates_json(const mesh::NetworkSnapshot& s)
{
    return {
        {"units", s.real_units ? "real" : "normalized"},
        {"line_rate_bps", s.line_rate_bps},
        {"aggregate_line_rate_bps", s.aggregate_line_rate_bps},
        {"occupied_bw_hz", s.occupied_bw_hz},
        {"framing_efficiency", s.framing_efficiency},
    };
}

std::optional<int> as_int(const json& v)
{
    if (!v.is_number_integer()) return std::nullopt;
    const auto x = v.get<long long>();
    if (x < -1'000'000 || x > 1'000'000) return std::nullopt;
    return static_cast<int>(x);
}

} // namespace

json snapshot_record(const mesh::NetworkSnapshot& s)
{
    json links = json::array();
    for (const auto& l : s.links) links.push_back(link_json(l));
    json nodes = json::array();
    for (const auto& n : s.nodes) nodes.push_back(node_json(n));
    return {
        {"type", "snapshot"},
        {"timestamp", s.timestamp},
        {"sample_index", s.sample_index},
        {"links", links},
        {"nodes", nodes},
        {"aggregate_throughput_bps", s.aggregate_throughput_bps},
        {"aggregate_addressed_bps", s.aggregate_addressed_bps},
        {"rates", rates_json(s)},
    };
}

json constellation_record(const mesh::NetworkSnapshot& s)
{
    json links = json::array();
    for (const auto& l : s.links) {
        json pts = json::array();
        for (const auto& p : l.constellation) pts.push_back({p.real(), p.imag()});
        links.push_back({{"src", l.src}, {"dst", l.dst}, {"points", pts}});
    }
    return {{"type", "constellation"}, {"timestamp", s.timestamp}, {"links", links}};
}

json event_record(double timestamp, const std::string& event, json fields)
{
    json j = {{"type", "event"}, {"timestamp", timestamp}, {"event", event}};
    for (auto it = fields.begin(); it != fields.end(); ++it) j[it.key()] = it.value();
    return j;
}

json ack_record(const mesh::ControlAck& ack, double sample_rate)
{
    if (!ack.ok) return nack_record(ack.command_id, ack.reason);
    return {
        {"type", "ack"},
        {"command_id", ack.command_id},
        {"winning_command_id", ack.winning_command_id},
        {"effective_index", ack.effective_index},
        {"effective_time", static_cast<double>(ack.effective_index) / sample_rate},
    };
}

json nack_record(std::optional<std::uint64_t> command_id, const std::string& reason)
{
    return {{"type", "nack"}, {"command_id", command_id ? json(*command_id) : json(nullptr)}, {"reason", reason}};
}

json summary_record(const ScenarioConfig& scenario, const mesh::NetworkSnapshot& last, bool complete)
{
    json sc = serialize(scenario);
    sc.erase("runtime");   // threading and pacing do not change results
    json links = json::array();
    for (const auto& l : last.links) links.push_back(link_json(l));
    json nodes = json::array();
    for (const auto& n : last.nodes) nodes.push_back(node_json(n));
    return {
        {"type", "summary"},
        {"complete", complete},
        {"scenario", sc},
        {"timestamp", last.timestamp},
        {"sample_index", last.sample_index},
        {"links", links},
        {"nodes", nodes},
        {"aggregate_throughput_bps", last.aggregate_throughput_bps},
        {"aggregate_addressed_bps", last.aggregate_addressed_bps},
        {"rates", rates_json(last)},
    };
}

std::variant<mesh::ControlCommand, ControlParseError> parse_control(const std::string& line)
{
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error& e) {
        return ControlParseError{std::nullopt, std::string("parse error: ") + e.what()};
    }
    if (!j.is_object()) return ControlParseError{std::nullopt, "parse error: record must be an object"};

    std::optional<std::uint64_t> id;
    if (j.contains("command_id")) {
        const auto& v = j.at("command_id");
        if (v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0)) id = v.get<std::uint64_t>();
        else return ControlParseError{std::nullopt, "command_id must be a non-negative integer"};
    }
    auto fail = [&](std::string reason) { return ControlParseError{id, std::move(reason)}; };
    if (!id) return fail("missing command_id");
    if (!j.contains("type") || !j.at("type").is_string()) return fail("missing type");
    const auto type = mesh::control_type_from_string(j.at("type").get<std::string>());
    if (!type) return fail("unknown command type '" + j.at("type").get<std::string>() + "'");

    mesh::ControlCommand c;
    c.type = *type;
    c.command_id = *id;

    const json target = j.contains("target") ? j.at("target") : json(nullptr);
    auto node_target = [&]() -> std::optional<int> {
        if (auto n = as_int(target)) return n;
        if (target.is_object() && target.contains("node")) return as_int(target.at("node"));
        return std::nullopt;
    };
    const json value = j.contains("value") ? j.at("value") : json(nullptr);

    switch (c.type) {
    case mesh::ControlType::SetGain:
    case mesh::ControlType::SetBand: {
        const auto n = node_target();
        if (!n) return fail("target must be {\"node\": n}");
        if (!value.is_number()) return fail("value must be a number");
        c.node = *n;
        c.number = value.get<double>();
        break;
    }
    case mesh::ControlType::SetModulation:
    case mesh::ControlType::SetDiversity:
    case mesh::ControlType::SetPayloadSource: {
        const auto n = node_target();
        if (!n) return fail("target must be {\"node\": n}");
        if (!value.is_string()) return fail("value must be a string");
        c.node = *n;
        c.text = value.get<std::string>();
        break;
    }
    case mesh::ControlType::SetSnr: {
        if (!value.is_number()) return fail("value must be a number");
        c.number = value.get<double>();
        if (target.is_null()) break;   // every link
        if (target.is_object() && target.contains("link")) {
            const auto& l = target.at("link");
            if (!l.is_array() || l.size() != 2) return fail("link target must be [src, dst]");
            const auto s = as_int(l[0]);
            const auto d = as_int(l[1]);
            if (!s || !d) return fail("link target must be [src, dst]");
            c.src = *s;
            c.node = *d;
        } else if (const auto n = node_target()) {
            c.node = *n;   // every link into this node
        } else {
            return fail("target must be {\"link\": [src, dst]} or {\"node\": n}");
        }
        break;
    }
    case mesh::ControlType::SwapBands: {
        if (!target.is_object() || !target.contains("nodes") || !target.at("nodes").is_array()
            || target.at("nodes").size() != 2)
            return fail("target must be {\"nodes\": [a, b]}");
        const auto a = as_int(target.at("nodes")[0]);
        const auto b = as_int(target.at("nodes")[1]);
        if (!a || !b) return fail("target must be {\"nodes\": [a, b]}");
        c.node = *a;
        c.node_b = *b;
        break;
    }
    case mesh::ControlType::Pause:
    case mesh::ControlType::Resume: break;
    }
    return c;
}

json control_record(const mesh::ControlCommand& c)
{
    json j = {{"type", mesh::to_string(c.type)}, {"command_id", c.command_id}};
    switch (c.type) {
    case mesh::ControlType::SetGain:
    case mesh::ControlType::SetBand:
        j["target"] = {{"node", c.node}};
        j["value"] = c.number;
        break;
    case mesh::ControlType::SetModulation:
    case mesh::ControlType::SetDiversity:
    case mesh::ControlType::SetPayloadSource:
        j["target"] = {{"node", c.node}};
        j["value"] = c.text;
        break;
    case mesh::ControlType::SetSnr:
        if (c.src >= 0) j["target"] = {{"link", {c.src, c.node}}};
        else if (c.node >= 0) j["target"] = {{"node", c.node}};
        j["value"] = c.number;
        break;
    case mesh::ControlType::SwapBands: j["target"] = {{"nodes", {c.node, c.node_b}}}; break;
    case mesh::ControlType::Pause:
    case mesh::ControlType::Resume: break;
    }
    return j;
}

std::string to_line(const json& j)
{
    auto s = j.dump(-1, ' ', false, json::error_handler_t::replace);
    s.push_back('\n');
    return s;
}

} // namespace rfmesh::runtime
