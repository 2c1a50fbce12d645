#include "rfmesh/runtime/run.hpp"

#include <fstream>

#include "rfmesh/runtime/records.hpp"
#include "rfmesh/runtime/sweep.hpp"

namespace rfmesh::runtime {

namespace {

struct IoFailure {
    std::string what;
};

void write_line(std::ofstream& f, const nlohmann::json& j, const std::filesystem::path& path)
{
    // One write call per line so a killed process leaves whole records behind.
    const auto line = to_line(j);
    f.write(line.data(), static_cast<std::streamsize>(line.size()));
    f.flush();
    if (!f) throw IoFailure{"write to '" + path.string() + "' failed"};
}

} // namespace

RunResult run(const ScenarioConfig& scenario, const RunOptions& opts)
{
    RunResult res;
    std::error_code ec;
    std::filesystem::create_directories(opts.out_dir, ec);
    if (ec) {
        res.status = 3;
        res.error = "cannot create '" + opts.out_dir.string() + "': " + ec.message();
        return res;
    }
    const auto log_path = opts.out_dir / "snapshots.jsonl";
    const auto summary_path = opts.out_dir / "summary.json";

    std::ofstream log;
    if (opts.write_snapshots) {
        log.open(log_path, std::ios::out | std::ios::trunc | std::ios::binary);
        if (!log) {
            res.status = 3;
            res.error = "cannot open '" + log_path.string() + "'";
            return res;
        }
    }

    mesh::NetworkSimulator sim(to_network_config(scenario));
    bool complete = false;
    try {
        sim.run_for(scenario.duration_s, [&](const mesh::NetworkSnapshot& s) {
            if (opts.write_snapshots) write_line(log, snapshot_record(s), log_path);
            if (opts.observer) opts.observer(s);
        });
        complete = true;
        res.last = sim.snapshot();
        res.summary = summary_record(scenario, res.last, true);

        if (scenario.sweep) {
            const auto table_path = opts.out_dir / "ber_table.txt";
            std::ofstream t(table_path, std::ios::out | std::ios::trunc);
            write_ber_table(t, ber_sweep(*scenario.sweep, scenario.seed));
            t.flush();
            if (!t) throw IoFailure{"write to '" + table_path.string() + "' failed"};
        }

        std::ofstream sf(summary_path, std::ios::out | std::ios::trunc | std::ios::binary);
        if (!sf) throw IoFailure{"cannot open '" + summary_path.string() + "'"};
        write_line(sf, res.summary, summary_path);
    } catch (const IoFailure& e) {
        res.status = 3;
        res.error = e.what;
        res.last = sim.snapshot();
        if (res.summary.is_null()) res.summary = summary_record(scenario, res.last, complete);
        if (log.is_open()) {
            log.clear();
            const auto marker = to_line({{"type", "partial"}, {"reason", e.what}, {"sample_index", res.last.sample_index}});
            log.write(marker.data(), static_cast<std::streamsize>(marker.size()));
            log.flush();
        }
    }
    return res;
}

} // namespace rfmesh::runtime
