#include <atomic>
#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "rfmesh/runtime/records.hpp"
#include "rfmesh/runtime/run.hpp"
#include "rfmesh/runtime/scenario.hpp"
#include "rfmesh/runtime/server.hpp"
#include "rfmesh/runtime/sweep.hpp"

using namespace rfmesh;

namespace {

std::atomic<bool> g_interrupted{false};

void on_signal(int)
{
    g_interrupted = true;
}

struct Common {
    std::string scenario_path;
    std::optional<std::uint64_t> seed;
    std::optional<double> duration;
    bool real_rate = false;
    bool single_thread = false;
};

void add_common(CLI::App* app, Common& c)
{
    app->add_option("--scenario", c.scenario_path, "Scenario file (JSON)")->check(CLI::ExistingFile);
    app->add_option("--seed", c.seed, "Override the scenario seed");
    app->add_option("--duration", c.duration, "Simulated seconds")->check(CLI::PositiveNumber);
    app->add_flag("--real-rate", c.real_rate, "Report rates in real units");
    app->add_flag("--single-thread", c.single_thread, "Run the simulation on one thread");
}

runtime::ScenarioConfig load(const Common& c)
{
    runtime::ScenarioConfig s;
    if (!c.scenario_path.empty()) {
        if (c.seed) {
            // A seed on the command line satisfies the required field.
            std::ifstream f(c.scenario_path);
            if (!f) throw runtime::ScenarioFileError("cannot open scenario file '" + c.scenario_path + "'");
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(f);
            } catch (const nlohmann::json::parse_error& e) {
                throw runtime::ScenarioParseError(std::string("scenario parse error: ") + e.what());
            }
            if (j.is_object()) j["seed"] = *c.seed;
            s = runtime::parse_scenario(j);
        } else {
            s = runtime::load_scenario(c.scenario_path);
        }
    } else {
        if (!c.seed) throw runtime::ScenarioValidationError(std::vector<runtime::FieldError>{{"seed", "required (pass --seed or --scenario)"}});
        s = runtime::parse_scenario(nlohmann::json{{"seed", *c.seed}});
    }
    if (c.duration) s.duration_s = *c.duration;
    if (c.real_rate) s.real_rate_reporting = true;
    if (c.single_thread) s.single_thread = true;
    return s;
}

std::pair<std::string, int> split_listen(const std::string& addr)
{
    const auto colon = addr.rfind(':');
    if (colon == std::string::npos) return {"127.0.0.1", std::stoi(addr)};
    auto host = addr.substr(0, colon);
    if (host.size() >= 2 && host.front() == '[' && host.back() == ']') host = host.substr(1, host.size() - 2);
    return {host.empty() ? "127.0.0.1" : host, std::stoi(addr.substr(colon + 1))};
}

int print_summary(const runtime::RunResult& r)
{
    const auto& s = r.last;
    std::cout << "simulated " << s.timestamp << " s, " << s.sample_index << " samples\n";
    std::cout << "link  band   BER          FER       EVM%    SINR dB  bits\n";
    for (const auto& l : s.links) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%d->%d  %d    %.3e   %.3e  %6.2f  %7.2f  %llu\n", l.src, l.dst, l.band,
                      l.metrics.ber, l.metrics.fer, l.metrics.evm_rms_pct, l.metrics.sinr_db,
                      static_cast<unsigned long long>(l.metrics.payload_bits));
        std::cout << buf;
    }
    std::cout << "aggregate throughput " << s.aggregate_throughput_bps << (s.real_units ? " bit/s" : " bit/symbol")
              << ", line rate " << s.aggregate_line_rate_bps << '\n';
    return r.status;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Four-node FDMA 2x2 MIMO mesh simulator"};
    app.require_subcommand(1);

    Common run_c;
    std::string out_dir = "out";
    auto* run_cmd = app.add_subcommand("run", "Batch run: snapshot log, summary and optional BER table");
    add_common(run_cmd, run_c);
    run_cmd->add_option("--out", out_dir, "Output directory");

    Common serve_c;
    std::string listen = "127.0.0.1:7878";
    std::optional<double> pace;
    int http_port = -1;
    auto* serve_cmd = app.add_subcommand("serve", "Live telemetry and control service");
    add_common(serve_cmd, serve_c);
    serve_cmd->add_option("--listen", listen, "TCP address for the line protocol, host:port");
    serve_cmd->add_option("--pace", pace, "Wall seconds per simulated second (0: as fast as possible)")
        ->check(CLI::NonNegativeNumber);
    serve_cmd->add_option("--http-port", http_port, "Port for the browser bridge (-1 disables, 0 picks one)");

    Common sweep_c;
    std::string sweep_out;
    std::optional<std::uint64_t> bits;
    std::vector<double> es_n0;
    auto* sweep_cmd = app.add_subcommand("sweep", "Monte-Carlo Gray 16-QAM BER over AWGN");
    add_common(sweep_cmd, sweep_c);
    sweep_cmd->add_option("--out", sweep_out, "Directory for ber_table.txt (default: stdout only)");
    sweep_cmd->add_option("--bits", bits, "Bits per point");
    sweep_cmd->add_option("--es-n0", es_n0, "Es/N0 points in dB");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) {
            const auto s = load(run_c);
            runtime::RunOptions opts;
            opts.out_dir = out_dir;
            const auto r = runtime::run(s, opts);
            if (r.status != 0) std::cerr << "error: " << r.error << '\n';
            return print_summary(r);
        }
        if (*serve_cmd) {
            auto s = load(serve_c);
            runtime::ServeOptions opts;
            std::tie(opts.host, opts.port) = split_listen(listen);
            opts.pace = pace;
            opts.http_port = http_port;
            opts.duration_s = serve_c.duration.value_or(0.0);
            runtime::Server server(s, opts);
            server.start();
            std::cerr << "listening on " << opts.host << ':' << server.port();
            if (server.http_port() >= 0) std::cerr << ", http bridge on port " << server.http_port();
            std::cerr << std::endl;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            std::thread waiter([&] { server.wait(); g_interrupted = true; });
            while (!g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(100));
            server.stop();
            waiter.join();
            return 0;
        }
        if (*sweep_cmd) {
            const auto s = load(sweep_c);
            auto settings = s.sweep.value_or(runtime::SweepSettings{});
            if (bits) settings.bits_per_point = *bits;
            if (!es_n0.empty()) settings.es_n0_db = es_n0;
            const auto pts = runtime::ber_sweep(settings, s.seed);
            runtime::write_ber_table(std::cout, pts);
            if (!sweep_out.empty()) {
                std::filesystem::create_directories(sweep_out);
                std::ofstream f(std::filesystem::path(sweep_out) / "ber_table.txt");
                runtime::write_ber_table(f, pts);
                if (!f) {
                    std::cerr << "error: cannot write " << sweep_out << "/ber_table.txt\n";
                    return 3;
                }
            }
            return 0;
        }
    } catch (const runtime::ScenarioFileError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const runtime::ScenarioParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const runtime::ScenarioValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
