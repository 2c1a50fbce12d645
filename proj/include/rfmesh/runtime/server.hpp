#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "rfmesh/mesh/network.hpp"
#include "rfmesh/runtime/scenario.hpp"

namespace rfmesh::runtime {

struct ServeOptions {
    std::string host = "127.0.0.1";
    int port = 7878;                  // 0: pick a free port
    int http_port = -1;               // browser bridge; -1 disabled, 0: pick a free port
    std::optional<double> pace;       // overrides scenario.pace
    double duration_s = 0.0;          // simulated seconds; 0 runs until stop()
    std::size_t client_queue = 64;    // telemetry records buffered per client
    bool constellations = true;
};

using Line = std::shared_ptr<const std::string>;

/// One subscriber. Telemetry goes through a bounded queue that drops the
/// oldest record when full; acks, nacks and events use an unbounded queue and
/// are always delivered first.
class ClientChannel {
public:
    ClientChannel(std::uint64_t id, std::size_t capacity);

    std::uint64_t id() const { return id_; }
    void push_telemetry(Line line);
    void push_reply(Line line);
    /// Wait for the next record. Returns nullptr once closed, or on timeout.
    Line pop(std::chrono::milliseconds timeout);
    void close();
    bool closed() const;
    std::uint64_t dropped() const;

private:
    const std::uint64_t id_;
    const std::size_t capacity_;
    mutable std::mutex mu_;
    std::condition_variable cv_;
    std::deque<Line> telemetry_;
    std::deque<Line> replies_;
    std::uint64_t dropped_total_ = 0;
    std::uint64_t dropped_unreported_ = 0;
    bool closed_ = false;
};

class HttpBridge;

/// Live service: paced simulation, NDJSON telemetry to every connected client,
/// control commands from any client. Controls are applied in command_id order
/// at the next telemetry boundary and each one gets exactly one ack or nack.
class Server {
public:
    Server(ScenarioConfig scenario, ServeOptions opts);
    ~Server();
    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    /// Bind sockets and start the simulation. Throws std::runtime_error when
    /// an address cannot be bound.
    void start();
    void stop();
    /// Block until the configured duration has been simulated or stop() is called.
    void wait();

    int port() const { return port_; }
    int http_port() const { return http_port_; }
    std::uint64_t snapshots_emitted() const { return snapshots_.load(); }

    // Used by the TCP reader threads and the HTTP bridge.
    std::shared_ptr<ClientChannel> attach();
    void detach(std::uint64_t id);
    void submit_line(const std::shared_ptr<ClientChannel>& from, const std::string& line);
    const ScenarioConfig& scenario() const { return scenario_; }
    std::string hello_line() const;

private:
    struct Pending {
        std::weak_ptr<ClientChannel> from;
        mesh::ControlCommand cmd;
    };
    struct Connection;

    void sim_loop();
    void accept_loop();
    void broadcast(const Line& line);
    void reply(const std::weak_ptr<ClientChannel>& to, const Line& line);
    void nack_pending(const std::string& reason);

    ScenarioConfig scenario_;
    ServeOptions opts_;
    double pace_ = 0.0;
    int listen_fd_ = -1;
    int port_ = 0;
    int http_port_ = -1;
    std::atomic<bool> stop_{false};
    std::atomic<bool> finished_{false};
    std::atomic<std::uint64_t> snapshots_{0};
    std::atomic<std::uint64_t> next_client_{1};
    double sample_rate_ = 1.0;
    double telemetry_period_ = 0.0;

    std::mutex clients_mu_;
    std::vector<std::shared_ptr<ClientChannel>> clients_;
    std::mutex conn_mu_;
    std::vector<std::unique_ptr<Connection>> connections_;

    std::mutex control_mu_;
    std::vector<Pending> controls_;

    std::mutex done_mu_;
    std::condition_variable done_cv_;

    std::thread sim_thread_;
    std::thread accept_thread_;
    std::unique_ptr<HttpBridge> http_;
};

} // namespace rfmesh::runtime
