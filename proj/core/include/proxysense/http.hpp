#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "proxysense/service.hpp"

namespace proxysense {

// Maps a request token to a worker id; nullopt rejects the request.
using Authenticator = std::function<std::optional<std::string>(const std::string& token)>;

struct HttpOptions {
  std::string admin_token;
  // Defaults to the service's registered worker tokens.
  Authenticator authenticate;
  std::int64_t radar_min_count = kDefaultRadarMinCount;
};

inline constexpr const char* kWorkerTokenHeader = "X-Worker-Token";
inline constexpr const char* kAdminTokenHeader = "X-Admin-Token";

// JSON-over-HTTP front end for a Service. Requests are serialized through
// one mutex, so the service sees a single writer.
//
//   GET  /healthz
//   GET  /tasks/next?worker=&kind=        worker token
//   POST /tasks/{id}/response             worker token
//   GET  /instances/{id}                  worker or admin token
//   POST /admin/batches                   admin token
//   GET  /reports/{name}                  admin token
class HttpServer {
 public:
  HttpServer(Service& service, HttpOptions options);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Returns the bound port, or -1.
  int bind(const std::string& host, int port = 0);
  // Blocks until stop().
  bool listen();
  void stop();
  bool running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace proxysense
