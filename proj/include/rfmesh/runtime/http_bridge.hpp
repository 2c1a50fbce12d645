#pragma once

#include <memory>
#include <string>
#include <thread>

namespace httplib {
class Server;
}

namespace rfmesh::runtime {

class Server;

/// Browser-facing bridge onto the same line protocol:
///   GET  /telemetry  chunked application/x-ndjson stream (hello, snapshots,
///                    constellations, events)
///   POST /control    body of one or more control lines; the response holds
///                    one ack or nack line per command
///   GET  /scenario   the running scenario as JSON
/// Every response carries permissive CORS headers.
class HttpBridge {
public:
    HttpBridge(Server& server, const std::string& host, int port);
    ~HttpBridge();

    int port() const { return port_; }
    void stop();

private:
    Server& server_;
    std::unique_ptr<httplib::Server> http_;
    std::thread thread_;
    int port_ = -1;
};

} // namespace rfmesh::runtime
