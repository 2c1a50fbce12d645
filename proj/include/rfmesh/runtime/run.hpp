#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include <json.hpp>

#include "rfmesh/mesh/network.hpp"
#include "rfmesh/runtime/scenario.hpp"

namespace rfmesh::runtime {

struct RunOptions {
    std::filesystem::path out_dir = "out";
    bool write_snapshots = true;
    /// Called after each snapshot is logged.
    std::function<void(const mesh::NetworkSnapshot&)> observer;
};

struct RunResult {
    int status = 0;                  // 0 ok, 3 I/O failure
    std::string error;
    mesh::NetworkSnapshot last;
    nlohmann::json summary;
};

/// Batch run: simulate `scenario.duration_s`, writing
///   snapshots.jsonl  one snapshot record per telemetry period
///   summary.json     the final summary record
///   ber_table.txt    when the scenario has a sweep block
/// On an I/O failure the run stops, a {"type":"partial"} marker is appended to
/// the snapshot log where possible, and status is nonzero.
RunResult run(const ScenarioConfig& scenario, const RunOptions& opts);

} // namespace rfmesh::runtime
