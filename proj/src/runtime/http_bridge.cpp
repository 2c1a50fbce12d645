#include "rfmesh/runtime/http_bridge.hpp"

#include <chrono>
#include <sstream>
#include <stdexcept>

#include "rfmesh/runtime/records.hpp"
#include "rfmesh/runtime/server.hpp"

#include <httplib.h>

namespace rfmesh::runtime {

using namespace std::chrono_literals;

HttpBridge::HttpBridge(Server& server, const std::string& host, int port)
    : server_(server)
    , http_(std::make_unique<httplib::Server>())
{
    http_->set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                                {"Access-Control-Allow-Headers", "Content-Type"},
                                {"Cache-Control", "no-cache"}});
    http_->Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    http_->Get("/scenario", [this](const httplib::Request&, httplib::Response& res) {
        res.set_content(serialize(server_.scenario()).dump(), "application/json");
    });

    http_->Get("/telemetry", [this](const httplib::Request&, httplib::Response& res) {
        auto channel = server_.attach();
        res.set_chunked_content_provider(
            "application/x-ndjson",
            [channel](std::size_t, httplib::DataSink& sink) {
                while (!channel->closed()) {
                    auto line = channel->pop(200ms);
                    if (!line) {
                        if (!sink.is_writable()) return false;
                        continue;
                    }
                    return sink.write(line->data(), line->size());
                }
                sink.done();
                return true;
            },
            [this, channel](bool) { server_.detach(channel->id()); });
    });

    http_->Post("/control", [this](const httplib::Request& req, httplib::Response& res) {
        // A private channel collects the replies for this request only.
        auto channel = std::make_shared<ClientChannel>(0, 1);
        std::istringstream in(req.body);
        std::string line;
        std::size_t expected = 0;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.find_first_not_of(" \t") == std::string::npos) continue;
            server_.submit_line(channel, line);
            ++expected;
        }
        std::string body;
        const auto deadline = std::chrono::steady_clock::now() + 5s;
        for (std::size_t got = 0; got < expected && std::chrono::steady_clock::now() < deadline;) {
            if (auto l = channel->pop(50ms)) {
                body += *l;
                ++got;
            }
        }
        res.set_content(body, "application/x-ndjson");
    });

    port_ = port == 0 ? http_->bind_to_any_port(host) : (http_->bind_to_port(host, port) ? port : -1);
    if (port_ < 0) throw std::runtime_error("cannot bind http bridge on " + host + ":" + std::to_string(port));
    thread_ = std::thread([this] { http_->listen_after_bind(); });
    http_->wait_until_ready();
}

HttpBridge::~HttpBridge()
{
    stop();
}

void HttpBridge::stop()
{
    if (http_) http_->stop();
    if (thread_.joinable()) thread_.join();
}

} // namespace rfmesh::runtime
