#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rfmesh/mesh/network.hpp"

namespace rfmesh::runtime {

struct SweepSettings {
    std::vector<double> es_n0_db{8.0, 10.0, 12.0, 14.0, 16.0};
    std::uint64_t bits_per_point = 1'000'000;

    bool operator==(const SweepSettings&) const = default;
};

/// Scenario file contents. Every field except `seed` has a default; see
/// docs/scenario.md for the schema.
struct ScenarioConfig {
    std::uint64_t seed = 0;
    double symbol_rate = 24.96e6;
    double duration_s = 0.02;
    double telemetry_period_s = 0.001;
    bool real_rate_reporting = false;

    channel::Profile profile = channel::Profile::AwgnOnly;
    double snr_db = 28.0;
    std::vector<mesh::LinkSnrOverride> link_snr;

    int payload_len = 4992;
    framing::Modulation modulation = framing::Modulation::Qam16;
    framing::DiversityMode diversity_mode = framing::DiversityMode::Alamouti;
    mesh::PayloadSource payload_source = mesh::PayloadSource::Prbs23;
    std::string payload_file;
    std::array<mesh::NodeConfig, mesh::kNodes> nodes{};   // filled from the frame defaults

    double detector_alpha = 8.0;
    int equalizer_taps = 9;
    double equalizer_mu = 0.01;

    int quantum_samples = 8192;
    bool single_thread = false;
    double pace = 100.0;           // serve: wall seconds per simulated second, 0 = unpaced

    std::optional<SweepSettings> sweep;

    ScenarioConfig();
    bool operator==(const ScenarioConfig& o) const;
};

struct FieldError {
    std::string path;
    std::string message;
};

class ScenarioFileError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ScenarioParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ScenarioValidationError : public std::runtime_error {
public:
    explicit ScenarioValidationError(std::vector<FieldError> errors);
    const std::vector<FieldError>& errors() const { return errors_; }

private:
    std::vector<FieldError> errors_;
};

ScenarioConfig load_scenario(const std::filesystem::path& path);
ScenarioConfig parse_scenario(const nlohmann::json& j);
ScenarioConfig parse_scenario_text(const std::string& text);
nlohmann::json serialize(const ScenarioConfig& cfg);

mesh::NetworkConfig to_network_config(const ScenarioConfig& cfg);

} // namespace rfmesh::runtime
