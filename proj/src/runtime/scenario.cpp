#include "rfmesh/runtime/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace rfmesh::runtime {

using nlohmann::json;

namespace {

std::string join_errors(const std::vector<FieldError>& errors)
{
    std::string s = "scenario validation failed:";
    for (const auto& e : errors) s += "\n  " + e.path + ": " + e.message;
    return s;
}

/// Reads fields from one JSON object, recording type and range errors with
/// their paths instead of throwing on the first one.
class Reader {
public:
    Reader(const json& obj, std::string path, std::vector<FieldError>& errors)
        : obj_(obj)
        , path_(std::move(path))
        , errors_(errors)
    {
    }

    std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    bool has(const std::string& key) const { return obj_.is_object() && obj_.contains(key); }
    const json& raw(const std::string& key) const { return obj_.at(key); }
    void fail(const std::string& key, const std::string& msg) const { errors_.push_back({at(key), msg}); }

    void number(const std::string& key, double& out, double lo, double hi, bool open_lo = false) const
    {
        if (!has(key)) return;
        const auto& v = obj_.at(key);
        if (!v.is_number()) return fail(key, "expected a number");
        const double x = v.get<double>();
        if (!std::isfinite(x) || x < lo || x > hi || (open_lo && x == lo))
            return fail(key, "out of range [" + fmt(lo) + ", " + fmt(hi) + "]");
        out = x;
    }

    void integer(const std::string& key, int& out, int lo, int hi) const
    {
        if (!has(key)) return;
        const auto& v = obj_.at(key);
        if (!v.is_number_integer()) return fail(key, "expected an integer");
        const auto x = v.get<long long>();
        if (x < lo || x > hi) return fail(key, "out of range [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
        out = static_cast<int>(x);
    }

    void boolean(const std::string& key, bool& out) const
    {
        if (!has(key)) return;
        const auto& v = obj_.at(key);
        if (!v.is_boolean()) return fail(key, "expected true or false");
        out = v.get<bool>();
    }

    void string(const std::string& key, std::string& out) const
    {
        if (!has(key)) return;
        const auto& v = obj_.at(key);
        if (!v.is_string()) return fail(key, "expected a string");
        out = v.get<std::string>();
    }

    template <typename Enum, typename Fn>
    void enumeration(const std::string& key, Enum& out, std::initializer_list<Enum> values, Fn&& name) const
    {
        if (!has(key)) return;
        const auto& v = obj_.at(key);
        if (!v.is_string()) return fail(key, "expected a string");
        const auto s = v.get<std::string>();
        std::string allowed;
        for (Enum e : values) {
            if (s == name(e)) {
                out = e;
                return;
            }
            allowed += (allowed.empty() ? "" : ", ") + std::string(name(e));
        }
        fail(key, "unknown value \"" + s + "\" (expected one of " + allowed + ")");
    }

    Reader object(const std::string& key) const
    {
        static const json empty = json::object();
        if (!has(key)) return Reader(empty, at(key), errors_);
        if (!obj_.at(key).is_object()) {
            fail(key, "expected an object");
            return Reader(empty, at(key), errors_);
        }
        return Reader(obj_.at(key), at(key), errors_);
    }

private:
    static std::string fmt(double x)
    {
        std::ostringstream os;
        os << x;
        return os.str();
    }

    const json& obj_;
    std::string path_;
    std::vector<FieldError>& errors_;
};

const auto modulation_name = [](framing::Modulation m) { return framing::to_string(m); };
const auto diversity_name = [](framing::DiversityMode d) { return framing::to_string(d); };
const auto profile_name = [](channel::Profile p) { return channel::to_string(p); };
const auto source_name = [](mesh::PayloadSource s) { return mesh::to_string(s); };

constexpr auto kModulations = {framing::Modulation::Qpsk, framing::Modulation::Qam16};
constexpr auto kDiversity = {framing::DiversityMode::Alamouti, framing::DiversityMode::SingleTxMrc};
constexpr auto kProfiles = {channel::Profile::Ideal, channel::Profile::AwgnOnly, channel::Profile::MultipathLight,
                            channel::Profile::Mobile};
constexpr auto kSources = {mesh::PayloadSource::Prbs23, mesh::PayloadSource::File, mesh::PayloadSource::SyntheticVideo};

} // namespace

ScenarioValidationError::ScenarioValidationError(std::vector<FieldError> errors)
    : std::runtime_error(join_errors(errors))
    , errors_(std::move(errors))
{
}

ScenarioConfig::ScenarioConfig()
{
    for (int n = 0; n < mesh::kNodes; ++n) {
        auto& node = nodes[static_cast<std::size_t>(n)];
        node.band = n;
        node.modulation = modulation;
        node.diversity_mode = diversity_mode;
        node.payload_source = payload_source;
    }
}

bool ScenarioConfig::operator==(const ScenarioConfig& o) const
{
    auto links_eq = [](const std::vector<mesh::LinkSnrOverride>& a, const std::vector<mesh::LinkSnrOverride>& b) {
        if (a.size() != b.size()) return false;
        for (std::size_t k = 0; k < a.size(); ++k)
            if (a[k].src != b[k].src || a[k].dst != b[k].dst || a[k].snr_db != b[k].snr_db) return false;
        return true;
    };
    return seed == o.seed && symbol_rate == o.symbol_rate && duration_s == o.duration_s
        && telemetry_period_s == o.telemetry_period_s && real_rate_reporting == o.real_rate_reporting
        && profile == o.profile && snr_db == o.snr_db && links_eq(link_snr, o.link_snr) && payload_len == o.payload_len
        && modulation == o.modulation && diversity_mode == o.diversity_mode && payload_source == o.payload_source
        && payload_file == o.payload_file && nodes == o.nodes && detector_alpha == o.detector_alpha
        && equalizer_taps == o.equalizer_taps && equalizer_mu == o.equalizer_mu && quantum_samples == o.quantum_samples
        && single_thread == o.single_thread && pace == o.pace && sweep == o.sweep;
}

ScenarioConfig parse_scenario(const json& j)
{
    std::vector<FieldError> errors;
    ScenarioConfig c;
    if (!j.is_object()) throw ScenarioValidationError(std::vector<FieldError>{{"$", "scenario must be a JSON object"}});
    const Reader r(j, "", errors);

    if (!r.has("seed")) errors.push_back({"seed", "required"});
    else if (!j.at("seed").is_number_unsigned() && !(j.at("seed").is_number_integer() && j.at("seed").get<long long>() >= 0))
        errors.push_back({"seed", "expected a non-negative integer"});
    else c.seed = j.at("seed").get<std::uint64_t>();

    r.number("symbol_rate", c.symbol_rate, 0.0, 1e12, true);
    r.number("duration_s", c.duration_s, 0.0, 1e6, true);
    r.number("telemetry_period_s", c.telemetry_period_s, 0.0, 1e6, true);
    r.boolean("real_rate_reporting", c.real_rate_reporting);

    const Reader ch = r.object("channel");
    ch.enumeration("profile", c.profile, kProfiles, profile_name);
    ch.number("snr_db", c.snr_db, -20.0, 80.0);
    if (ch.has("links")) {
        const auto& arr = ch.raw("links");
        if (!arr.is_array()) ch.fail("links", "expected an array");
        else
            for (std::size_t k = 0; k < arr.size(); ++k) {
                const Reader l(arr[k], ch.at("links") + "[" + std::to_string(k) + "]", errors);
                if (!arr[k].is_object()) {
                    errors.push_back({ch.at("links") + "[" + std::to_string(k) + "]", "expected an object"});
                    continue;
                }
                mesh::LinkSnrOverride o;
                o.src = -1;
                o.dst = -1;
                o.snr_db = c.snr_db;
                l.integer("src", o.src, 0, mesh::kNodes - 1);
                l.integer("dst", o.dst, 0, mesh::kNodes - 1);
                l.number("snr_db", o.snr_db, -20.0, 80.0);
                if (!l.has("src")) l.fail("src", "required");
                if (!l.has("dst")) l.fail("dst", "required");
                if (!l.has("snr_db")) l.fail("snr_db", "required");
                if (o.src >= 0 && o.src == o.dst) l.fail("dst", "must differ from src");
                c.link_snr.push_back(o);
            }
    }

    const Reader fr = r.object("frame");
    fr.integer("payload_len", c.payload_len, 0, 8192);
    fr.enumeration("modulation", c.modulation, kModulations, modulation_name);
    fr.enumeration("diversity_mode", c.diversity_mode, kDiversity, diversity_name);
    fr.enumeration("payload_source", c.payload_source, kSources, source_name);
    fr.string("payload_file", c.payload_file);
    if (c.payload_source == mesh::PayloadSource::File && c.payload_file.empty())
        fr.fail("payload_file", "required when payload_source is FILE");

    for (int n = 0; n < mesh::kNodes; ++n) {
        auto& node = c.nodes[static_cast<std::size_t>(n)];
        node.band = n;
        node.modulation = c.modulation;
        node.diversity_mode = c.diversity_mode;
        node.payload_source = c.payload_source;
        node.payload_file = c.payload_file;
    }
    if (r.has("nodes")) {
        const auto& arr = j.at("nodes");
        if (!arr.is_array() || arr.size() > static_cast<std::size_t>(mesh::kNodes)) {
            errors.push_back({"nodes", "expected an array of at most 4 objects"});
        } else {
            for (std::size_t k = 0; k < arr.size(); ++k) {
                const std::string p = "nodes[" + std::to_string(k) + "]";
                if (!arr[k].is_object()) {
                    errors.push_back({p, "expected an object"});
                    continue;
                }
                const Reader nr(arr[k], p, errors);
                auto& node = c.nodes[k];
                nr.number("gain", node.gain, 0.0, 10.0, true);
                nr.integer("band", node.band, 0, mesh::kNodes - 1);
                nr.enumeration("modulation", node.modulation, kModulations, modulation_name);
                nr.enumeration("diversity_mode", node.diversity_mode, kDiversity, diversity_name);
                nr.enumeration("payload_source", node.payload_source, kSources, source_name);
                nr.string("payload_file", node.payload_file);
                if (node.payload_source == mesh::PayloadSource::File && node.payload_file.empty())
                    nr.fail("payload_file", "required when payload_source is FILE");
            }
            std::array<int, mesh::kNodes> count{};
            for (const auto& node : c.nodes) ++count[static_cast<std::size_t>(node.band)];
            for (int b = 0; b < mesh::kNodes; ++b)
                if (count[static_cast<std::size_t>(b)] != 1) {
                    errors.push_back({"nodes", "bands must be a permutation of 0..3"});
                    break;
                }
        }
    }

    const Reader rx = r.object("receiver");
    rx.number("detector_alpha", c.detector_alpha, 0.0, 1e6, true);
    rx.integer("equalizer_taps", c.equalizer_taps, 1, 63);
    if (c.equalizer_taps % 2 == 0) rx.fail("equalizer_taps", "must be odd");
    rx.number("equalizer_mu", c.equalizer_mu, 0.0, 2.0);

    const Reader rt = r.object("runtime");
    rt.integer("quantum_samples", c.quantum_samples, 64, 1 << 22);
    rt.boolean("single_thread", c.single_thread);
    rt.number("pace", c.pace, 0.0, 1e9);

    if (r.has("sweep")) {
        const Reader sw = r.object("sweep");
        SweepSettings s;
        if (sw.has("es_n0_db")) {
            const auto& arr = sw.raw("es_n0_db");
            if (!arr.is_array() || arr.empty()) sw.fail("es_n0_db", "expected a non-empty array of numbers");
            else {
                s.es_n0_db.clear();
                for (std::size_t k = 0; k < arr.size(); ++k) {
                    if (!arr[k].is_number()) {
                        errors.push_back({sw.at("es_n0_db") + "[" + std::to_string(k) + "]", "expected a number"});
                        continue;
                    }
                    s.es_n0_db.push_back(arr[k].get<double>());
                }
            }
        }
        if (sw.has("bits_per_point")) {
            const auto& v = sw.raw("bits_per_point");
            if (!v.is_number_integer() || v.get<long long>() < 4) sw.fail("bits_per_point", "expected an integer >= 4");
            else s.bits_per_point = v.get<std::uint64_t>();
        }
        c.sweep = s;
    }

    if (!errors.empty()) throw ScenarioValidationError(std::move(errors));
    return c;
}

ScenarioConfig parse_scenario_text(const std::string& text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ScenarioParseError(std::string("scenario parse error: ") + e.what());
    }
    return parse_scenario(j);
}

ScenarioConfig load_scenario(const std::filesystem::path& path)
{
    std::ifstream f(path);
    if (!f) throw ScenarioFileError("cannot open scenario file '" + path.string() + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_scenario_text(ss.str());
}

json serialize(const ScenarioConfig& c)
{
    json j;
    j["seed"] = c.seed;
    j["symbol_rate"] = c.symbol_rate;
    j["duration_s"] = c.duration_s;
    j["telemetry_period_s"] = c.telemetry_period_s;
    j["real_rate_reporting"] = c.real_rate_reporting;
    json links = json::array();
    for (const auto& l : c.link_snr) links.push_back({{"src", l.src}, {"dst", l.dst}, {"snr_db", l.snr_db}});
    j["channel"] = {{"profile", channel::to_string(c.profile)}, {"snr_db", c.snr_db}, {"links", links}};
    j["frame"] = {{"payload_len", c.payload_len},
                  {"modulation", framing::to_string(c.modulation)},
                  {"diversity_mode", framing::to_string(c.diversity_mode)},
                  {"payload_source", mesh::to_string(c.payload_source)},
                  {"payload_file", c.payload_file}};
    json nodes = json::array();
    for (const auto& n : c.nodes)
        nodes.push_back({{"gain", n.gain},
                         {"band", n.band},
                         {"modulation", framing::to_string(n.modulation)},
                         {"diversity_mode", framing::to_string(n.diversity_mode)},
                         {"payload_source", mesh::to_string(n.payload_source)},
                         {"payload_file", n.payload_file}});
    j["nodes"] = nodes;
    j["receiver"] = {{"detector_alpha", c.detector_alpha}, {"equalizer_taps", c.equalizer_taps}, {"equalizer_mu", c.equalizer_mu}};
    j["runtime"] = {{"quantum_samples", c.quantum_samples}, {"single_thread", c.single_thread}, {"pace", c.pace}};
    if (c.sweep) j["sweep"] = {{"es_n0_db", c.sweep->es_n0_db}, {"bits_per_point", c.sweep->bits_per_point}};
    return j;
}

mesh::NetworkConfig to_network_config(const ScenarioConfig& c)
{
    mesh::NetworkConfig n;
    n.symbol_rate = c.symbol_rate;
    n.real_rate_reporting = c.real_rate_reporting;
    n.profile = c.profile;
    n.snr_db = c.snr_db;
    n.link_snr = c.link_snr;
    n.payload_len = c.payload_len;
    n.nodes = c.nodes;
    n.seed = c.seed;
    n.quantum_samples = c.quantum_samples;
    n.telemetry_period_s = c.telemetry_period_s;
    n.concurrent = !c.single_thread;
    n.rx.detector.alpha = c.detector_alpha;
    n.rx.equalizer.taps = c.equalizer_taps;
    n.rx.equalizer.mu = c.equalizer_mu;
    return n;
}

} // namespace rfmesh::runtime
