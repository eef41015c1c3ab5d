#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "tombandit/session.hpp"

namespace tombandit {

/// JSON-over-HTTP front end for a SessionManager:
///   POST /v1/sessions, GET /v1/sessions/{id}/question,
///   POST /v1/sessions/{id}/answer, GET /v1/sessions/{id},
///   GET /v1/vocabularies, GET /healthz
class HttpService {
 public:
  explicit HttpService(SessionManager& sessions, std::filesystem::path static_dir = {});
  ~HttpService();
  HttpService(const HttpService&) = delete;
  HttpService& operator=(const HttpService&) = delete;

  /// Binds and serves until stop(). Returns false if binding failed.
  bool listen(const std::string& host, int port);
  /// Binds an ephemeral port and returns it (or -1); serve with listen_after_bind().
  int bind_any_port(const std::string& host);
  bool listen_after_bind();
  void wait_until_ready() const;
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Splits "host:port"; a bare port means 0.0.0.0.
std::pair<std::string, int> parse_listen_address(const std::string& address);

}  // namespace tombandit
