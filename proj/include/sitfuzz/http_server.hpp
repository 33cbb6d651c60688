#pragma once

#include <memory>
#include <string>

#include "sitfuzz/service.hpp"

namespace sitfuzz {

/// JSON over HTTP in front of a Service.
///
///   GET  /health
///   GET  /kbs                                   registered KB ids
///   POST /kbs[?id=ID]                           body: KB document
///   POST /sessions                              body: session config
///   POST /sessions/{id}/turns                   body: {"utterance": "..."}
///   GET  /sessions/{id}/state
///   GET  /sessions/{id}/decisions/{did}/explanation
///   GET  /sessions/{id}/ticks?steps=N           chunked NDJSON, one record per line;
///        [&policy=wisdom|intuition][&theta=T]   changes the session's settings first
///
/// Errors answer {"error": code, "detail": text} with 404 for unknown
/// sessions, KBs and decisions, 422 for KB integrity failures and 400
/// otherwise.
class HttpServer {
 public:
  explicit HttpServer(Service &service);
  ~HttpServer();

  HttpServer(const HttpServer &) = delete;
  HttpServer &operator=(const HttpServer &) = delete;

  /// Binds `host:port`; port 0 picks a free one. Returns the bound port or
  /// -1 on failure.
  int bind(const std::string &host, int port);
  /// Serves until stop(). Requires bind().
  bool listen();
  void stop();
  void waitUntilReady() const;

  static constexpr int kMaxTickSteps = 10000;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// HTTP status for a library error code.
int httpStatusFor(const std::string &error_code);

}  // namespace sitfuzz
