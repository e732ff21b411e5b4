#pragma once

// cpp-httplib transport for TriageService. Optionally serves a static UI
// directory under "/".

#include <memory>
#include <optional>
#include <string>

#include "httplib.h"
#include "phonespam/service.hpp"

namespace phonespam {

class HttpServer {
 public:
  explicit HttpServer(TriageService& service, std::optional<std::string> static_dir = std::nullopt)
      : service_(service) {
    // httplib defaults to SO_REUSEPORT, which lets a second server share a busy port.
    server_.set_socket_options([](socket_t sock) {
      int yes = 1;
      ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes), sizeof(yes));
    });
    auto handler = [this](const httplib::Request& req, httplib::Response& res) {
      ApiRequest r{req.method, req.path, {}, req.body};
      for (const auto& [k, v] : req.params) r.query.emplace(k, v);
      ApiResponse out;
      try {
        out = service_.handle(r);
      } catch (const std::exception& e) {
        out = {500, {{"error", "internal"}, {"message", e.what()}, {"run_id", service_.run_id()}}};
      }
      res.status = out.status;
      res.set_content(out.body.dump(), "application/json");
    };
    for (const char* pattern : {"/campaigns", R"(/campaigns/[^/]+)", R"(/campaigns/[^/]+/metrics)", R"(/runs/[^/]+)",
                                "/report"})
      server_.Get(pattern, handler);
    server_.Post(R"(/campaigns/[^/]+/label)", handler);
    if (static_dir) server_.set_mount_point("/", *static_dir);
  }

  // Binds and blocks until stop(). Throws port_in_use when the bind fails.
  void listen(const std::string& host, int port) {
    if (!server_.bind_to_port(host, port)) throw Error(ErrorCode::port_in_use, host + ":" + std::to_string(port));
    server_.listen_after_bind();
  }

  // Binds an ephemeral port and returns it; call run() afterwards.
  int bind_any(const std::string& host) {
    const int port = server_.bind_to_any_port(host);
    if (port < 0) throw Error(ErrorCode::port_in_use, host + ":any");
    return port;
  }
  void run() { server_.listen_after_bind(); }
  void stop() { server_.stop(); }
  void wait_until_ready() { server_.wait_until_ready(); }

 private:
  TriageService& service_;
  httplib::Server server_;
};

}  // namespace phonespam
