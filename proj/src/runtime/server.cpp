#include "rfmesh/runtime/server.hpp"

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <limits>
#include <stdexcept>

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include "rfmesh/runtime/http_bridge.hpp"
#include "rfmesh/runtime/records.hpp"

namespace rfmesh::runtime {

using namespace std::chrono_literals;
using Clock = std::chrono::steady_clock;

namespace {

constexpr std::size_t kMaxLine = 1 << 16;

Line make_line(const nlohmann::json& j)
{
    return std::make_shared<const std::string>(to_line(j));
}

bool send_all(int fd, const std::string& s)
{
    std::size_t off = 0;
    while (off < s.size()) {
        const auto n = ::send(fd, s.data() + off, s.size() - off, MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            return false;
        }
        off += static_cast<std::size_t>(n);
    }
    return true;
}

} // namespace

// ClientChannel

ClientChannel::ClientChannel(std::uint64_t id, std::size_t capacity)
    : id_(id)
    , capacity_(std::max<std::size_t>(1, capacity))
{
}

void ClientChannel::push_telemetry(Line line)
{
    {
        std::lock_guard lk(mu_);
        if (closed_) return;
        if (telemetry_.size() >= capacity_) {
            telemetry_.pop_front();
            ++dropped_total_;
            ++dropped_unreported_;
        }
        telemetry_.push_back(std::move(line));
    }
    cv_.notify_one();
}

void ClientChannel::push_reply(Line line)
{
    {
        std::lock_guard lk(mu_);
        if (closed_) return;
        replies_.push_back(std::move(line));
    }
    cv_.notify_one();
}

Line ClientChannel::pop(std::chrono::milliseconds timeout)
{
    std::unique_lock lk(mu_);
    cv_.wait_for(lk, timeout, [&] { return closed_ || !replies_.empty() || !telemetry_.empty(); });
    if (closed_) return nullptr;
    if (!replies_.empty()) {
        auto l = std::move(replies_.front());
        replies_.pop_front();
        return l;
    }
    if (telemetry_.empty()) return nullptr;
    if (dropped_unreported_ > 0) {
        // Report the gap just before the first record after it.
        double ts = 0.0;
        try {
            ts = nlohmann::json::parse(*telemetry_.front()).value("timestamp", 0.0);
        } catch (const nlohmann::json::exception&) {
        }
        auto ev = make_line(event_record(ts, "telemetry_dropped",
                                         {{"dropped", dropped_unreported_}, {"total_dropped", dropped_total_}}));
        dropped_unreported_ = 0;
        return ev;
    }
    auto l = std::move(telemetry_.front());
    telemetry_.pop_front();
    return l;
}

void ClientChannel::close()
{
    {
        std::lock_guard lk(mu_);
        closed_ = true;
        telemetry_.clear();
        replies_.clear();
    }
    cv_.notify_all();
}

bool ClientChannel::closed() const
{
    std::lock_guard lk(mu_);
    return closed_;
}

std::uint64_t ClientChannel::dropped() const
{
    std::lock_guard lk(mu_);
    return dropped_total_;
}

// Server

struct Server::Connection {
    int fd = -1;
    std::shared_ptr<ClientChannel> channel;
    std::thread reader;
    std::thread writer;
    std::atomic<int> running{2};
};

Server::Server(ScenarioConfig scenario, ServeOptions opts)
    : scenario_(std::move(scenario))
    , opts_(std::move(opts))
{
    pace_ = opts_.pace.value_or(scenario_.pace);
    if (pace_ < 0.0) throw std::invalid_argument("pace must be >= 0");
    sample_rate_ = scenario_.symbol_rate * 8.0;
    telemetry_period_ = scenario_.telemetry_period_s;
}

Server::~Server()
{
    stop();
}

void Server::start()
{
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    hints.ai_flags = AI_PASSIVE | AI_NUMERICSERV;
    addrinfo* res = nullptr;
    const auto port_str = std::to_string(opts_.port);
    if (const int rc = ::getaddrinfo(opts_.host.c_str(), port_str.c_str(), &hints, &res); rc != 0)
        throw std::runtime_error("cannot resolve '" + opts_.host + "': " + ::gai_strerror(rc));
    std::string err = "no address";
    for (auto* ai = res; ai; ai = ai->ai_next) {
        const int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
        if (fd < 0) continue;
        const int one = 1;
        ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
        if (::bind(fd, ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(fd, 16) == 0) {
            listen_fd_ = fd;
            break;
        }
        err = std::strerror(errno);
        ::close(fd);
    }
    ::freeaddrinfo(res);
    if (listen_fd_ < 0) throw std::runtime_error("cannot listen on " + opts_.host + ":" + port_str + ": " + err);

    sockaddr_storage addr{};
    socklen_t len = sizeof addr;
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = addr.ss_family == AF_INET6 ? ntohs(reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port)
                                       : ntohs(reinterpret_cast<sockaddr_in*>(&addr)->sin_port);

    if (opts_.http_port >= 0) {
        http_ = std::make_unique<HttpBridge>(*this, opts_.host, opts_.http_port);
        http_port_ = http_->port();
    }
    accept_thread_ = std::thread([this] { accept_loop(); });
    sim_thread_ = std::thread([this] { sim_loop(); });
}

void Server::stop()
{
    if (stop_.exchange(true)) return;
    if (http_) http_->stop();
    if (sim_thread_.joinable()) sim_thread_.join();
    if (accept_thread_.joinable()) accept_thread_.join();
    if (listen_fd_ >= 0) ::close(listen_fd_);
    listen_fd_ = -1;
    {
        std::lock_guard lk(clients_mu_);
        for (auto& c : clients_) c->close();
    }
    std::vector<std::unique_ptr<Connection>> conns;
    {
        std::lock_guard lk(conn_mu_);
        conns.swap(connections_);
    }
    for (auto& c : conns) {
        ::shutdown(c->fd, SHUT_RDWR);
        if (c->reader.joinable()) c->reader.join();
        if (c->writer.joinable()) c->writer.join();
        ::close(c->fd);
    }
    http_.reset();
    {
        std::lock_guard lk(done_mu_);
        finished_ = true;
    }
    done_cv_.notify_all();
}

void Server::wait()
{
    std::unique_lock lk(done_mu_);
    done_cv_.wait(lk, [&] { return finished_.load() || stop_.load(); });
}

std::shared_ptr<ClientChannel> Server::attach()
{
    auto c = std::make_shared<ClientChannel>(next_client_++, opts_.client_queue);
    c->push_reply(std::make_shared<const std::string>(hello_line()));
    std::lock_guard lk(clients_mu_);
    clients_.push_back(c);
    return c;
}

void Server::detach(std::uint64_t id)
{
    std::lock_guard lk(clients_mu_);
    std::erase_if(clients_, [&](const auto& c) {
        if (c->id() != id) return false;
        c->close();
        return true;
    });
}

std::string Server::hello_line() const
{
    return to_line(event_record(0.0, "hello",
                                {{"protocol", 1},
                                 {"nodes", mesh::kNodes},
                                 {"links", mesh::kLinks},
                                 {"telemetry_period_s", telemetry_period_},
                                 {"real_rate_reporting", scenario_.real_rate_reporting},
                                 {"pace", pace_}}));
}

void Server::submit_line(const std::shared_ptr<ClientChannel>& from, const std::string& line)
{
    auto parsed = parse_control(line);
    if (auto* e = std::get_if<ControlParseError>(&parsed)) {
        from->push_reply(make_line(nack_record(e->command_id, e->reason)));
        return;
    }
    auto& cmd = std::get<mesh::ControlCommand>(parsed);
    std::lock_guard lk(control_mu_);
    if (finished_ || stop_) {
        from->push_reply(make_line(nack_record(cmd.command_id, "simulation finished")));
        return;
    }
    controls_.push_back({from, std::move(cmd)});
}

void Server::broadcast(const Line& line)
{
    std::lock_guard lk(clients_mu_);
    for (auto& c : clients_) c->push_telemetry(line);
}

void Server::reply(const std::weak_ptr<ClientChannel>& to, const Line& line)
{
    if (auto c = to.lock()) c->push_reply(line);
}

void Server::nack_pending(const std::string& reason)
{
    std::vector<Pending> batch;
    {
        std::lock_guard lk(control_mu_);
        batch.swap(controls_);
    }
    for (auto& p : batch) reply(p.from, make_line(nack_record(p.cmd.command_id, reason)));
}

void Server::sim_loop()
{
    mesh::NetworkSimulator sim(to_network_config(scenario_));
    const std::int64_t tick = sim.telemetry_period_samples();
    const std::int64_t end = opts_.duration_s > 0.0 ? sim.samples_for(opts_.duration_s)
                                                    : std::numeric_limits<std::int64_t>::max();
    auto anchor_wall = Clock::now();
    std::int64_t anchor_sample = 0;
    const auto wall_period = std::chrono::duration<double>(static_cast<double>(tick) / sample_rate_ * pace_);

    auto on_snapshot = [&](const mesh::NetworkSnapshot& s) {
        broadcast(make_line(snapshot_record(s)));
        if (opts_.constellations) broadcast(make_line(constellation_record(s)));
        ++snapshots_;
    };

    while (!stop_) {
        std::vector<Pending> batch;
        {
            std::lock_guard lk(control_mu_);
            batch.swap(controls_);
        }
        if (!batch.empty()) {
            std::vector<mesh::ControlCommand> cmds;
            cmds.reserve(batch.size());
            for (const auto& p : batch) cmds.push_back(p.cmd);
            const bool was_paused = sim.paused();
            const auto acks = sim.apply_controls(std::move(cmds));
            for (std::size_t k = 0; k < batch.size(); ++k) reply(batch[k].from, make_line(ack_record(acks[k], sample_rate_)));
            if (sim.paused() != was_paused)
                broadcast(make_line(event_record(sim.seconds(), sim.paused() ? "paused" : "resumed")));
        }
        if (sim.paused()) {
            std::this_thread::sleep_for(10ms);
            anchor_wall = Clock::now();
            anchor_sample = sim.sample_index();
            continue;
        }
        if (sim.sample_index() >= end) break;

        const std::int64_t next = std::min(end, (sim.sample_index() / tick + 1) * tick);
        sim.run_until(next, on_snapshot);

        if (pace_ > 0.0) {
            const auto target = anchor_wall
                + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(
                    static_cast<double>(sim.sample_index() - anchor_sample) / sample_rate_ * pace_));
            auto now = Clock::now();
            if (now > target + wall_period) {
                // Running behind: do not try to catch up in a burst.
                anchor_wall = now;
                anchor_sample = sim.sample_index();
            }
            while (!stop_ && (now = Clock::now()) < target) std::this_thread::sleep_for(std::min<Clock::duration>(target - now, 20ms));
        }
    }
    {
        std::lock_guard lk(control_mu_);
        finished_ = true;
    }
    nack_pending("simulation finished");
    broadcast(make_line(event_record(sim.seconds(), "finished", {{"sample_index", sim.sample_index()}})));
    { std::lock_guard lk(done_mu_); }
    done_cv_.notify_all();
}

void Server::accept_loop()
{
    while (!stop_) {
        pollfd p{listen_fd_, POLLIN, 0};
        const int rc = ::poll(&p, 1, 50);
        {
            // Reap connections whose threads have both exited.
            std::lock_guard lk(conn_mu_);
            std::erase_if(connections_, [](auto& c) {
                if (c->running.load() != 0) return false;
                c->reader.join();
                c->writer.join();
                ::close(c->fd);
                return true;
            });
        }
        if (rc <= 0) continue;
        const int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) continue;
        const int one = 1;
        ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);

        auto conn = std::make_unique<Connection>();
        conn->fd = fd;
        conn->channel = attach();
        auto* c = conn.get();
        c->reader = std::thread([this, c] {
            std::string buf;
            char chunk[4096];
            while (!stop_ && !c->channel->closed()) {
                pollfd p{c->fd, POLLIN, 0};
                if (::poll(&p, 1, 50) <= 0) continue;
                const auto n = ::recv(c->fd, chunk, sizeof chunk, 0);
                if (n <= 0) break;
                buf.append(chunk, static_cast<std::size_t>(n));
                std::size_t pos;
                while ((pos = buf.find('\n')) != std::string::npos) {
                    std::string line = buf.substr(0, pos);
                    buf.erase(0, pos + 1);
                    if (!line.empty() && line.back() == '\r') line.pop_back();
                    if (line.find_first_not_of(" \t") != std::string::npos) submit_line(c->channel, line);
                }
                if (buf.size() > kMaxLine) {
                    c->channel->push_reply(make_line(nack_record(std::nullopt, "parse error: line too long")));
                    buf.clear();
                }
            }
            detach(c->channel->id());
            --c->running;
        });
        c->writer = std::thread([this, c] {
            while (true) {
                auto line = c->channel->pop(50ms);
                if (!line) {
                    if (c->channel->closed() || stop_) break;
                    continue;
                }
                if (!send_all(c->fd, *line)) {
                    c->channel->close();
                    ::shutdown(c->fd, SHUT_RDWR);
                    break;
                }
            }
            --c->running;
        });
        std::lock_guard lk(conn_mu_);
        connections_.push_back(std::move(conn));
    }
}

} // namespace rfmesh::runtime
