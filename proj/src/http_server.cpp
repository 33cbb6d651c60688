#include "sitfuzz/http_server.hpp"

#include <charconv>

#include <httplib.h>

namespace sitfuzz {

using nlohmann::json;

namespace {

constexpr const char *kJson = "application/json";

void sendJson(httplib::Response &res, int status, const json &body) {
  res.status = status;
  res.set_content(dumpJson(body), kJson);
}

void sendError(httplib::Response &res, const std::string &code, const std::string &detail) {
  sendJson(res, httpStatusFor(code), {{"error", code}, {"detail", detail}});
}

json parseBody(const httplib::Request &req) {
  try {
    return json::parse(req.body);
  } catch (const json::exception &e) {
    throw SchemaError(std::string("request body is not JSON: ") + e.what());
  }
}

/// Runs a handler, mapping library errors onto status codes.
template <typename F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request &req, httplib::Response &res) {
    try {
      f(req, res);
    } catch (const Error &e) {
      sendError(res, e.code(), e.what());
    } catch (const std::exception &e) {
      sendError(res, "InternalError", e.what());
    }
  };
}

int parseSteps(const httplib::Request &req) {
  if (!req.has_param("steps")) return 1;
  const auto text = req.get_param_value("steps");
  int steps = -1;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), steps);
  if (ec != std::errc() || ptr != text.data() + text.size() || steps < 0 || steps > HttpServer::kMaxTickSteps) {
    throw DomainError("steps must be an integer between 0 and " + std::to_string(HttpServer::kMaxTickSteps));
  }
  return steps;
}

double parseTheta(const std::string &text) {
  double theta = -1;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), theta);
  if (ec != std::errc() || ptr != text.data() + text.size()) throw DomainError("theta must be a number in [0,1]");
  return theta;
}

}  // namespace

int httpStatusFor(const std::string &code) {
  if (code == "UnknownSession" || code == "UnknownKB" || code == "UnknownDecision") return 404;
  if (code == "IntegrityError") return 422;
  if (code == "InternalError") return 500;
  return 400;
}

struct HttpServer::Impl {
  Service &service;
  httplib::Server server;

  explicit Impl(Service &s) : service(s) { routes(); }

  void routes() {
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Allow-Headers", "Content-Type"},
                                {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
    server.Options(R"(/.*)", [](const httplib::Request &, httplib::Response &res) { res.status = 204; });

    server.Get("/health", [](const httplib::Request &, httplib::Response &res) {
      sendJson(res, 200, {{"status", "ok"}});
    });

    server.Get("/kbs", guarded([this](const httplib::Request &, httplib::Response &res) {
                 sendJson(res, 200, {{"kbs", service.knowledgeBaseIds()}});
               }));

    server.Post("/kbs", guarded([this](const httplib::Request &req, httplib::Response &res) {
                  std::optional<std::string> id;
                  if (req.has_param("id")) id = req.get_param_value("id");
                  const auto stored = service.putKnowledgeBaseDocument(req.body, id);
                  sendJson(res, 201, {{"id", stored}, {"version", service.knowledgeBase(stored)->version}});
                }));

    server.Post("/sessions", guarded([this](const httplib::Request &req, httplib::Response &res) {
                  const auto id = service.createSession(SessionConfig::fromJson(parseBody(req)));
                  sendJson(res, 201, {{"id", id}});
                }));

    server.Post("/sessions/:id/turns", guarded([this](const httplib::Request &req, httplib::Response &res) {
                  const auto body = parseBody(req);
                  if (!body.is_object() || !body.contains("utterance") || !body["utterance"].is_string()) {
                    throw SchemaError("expected {\"utterance\": string}");
                  }
                  const auto r = service.dialogTurn(req.path_params.at("id"), body["utterance"].get<std::string>());
                  sendJson(res, 200, r.toJson());
                }));

    server.Get("/sessions/:id/state", guarded([this](const httplib::Request &req, httplib::Response &res) {
                 sendJson(res, 200, service.getState(req.path_params.at("id")));
               }));

    server.Get("/sessions/:id/decisions/:did/explanation",
               guarded([this](const httplib::Request &req, httplib::Response &res) {
                 sendJson(res, 200,
                          service.explanation(req.path_params.at("id"), req.path_params.at("did")));
               }));

    server.Get("/sessions/:id/ticks", guarded([this](const httplib::Request &req, httplib::Response &res) {
                 const auto id = req.path_params.at("id");
                 const int steps = parseSteps(req);
                 if (!service.hasSession(id)) throw UnknownSession(id);
                 std::optional<Policy> policy;
                 std::optional<double> theta;
                 if (req.has_param("policy")) policy = policyFromString(req.get_param_value("policy"));
                 if (req.has_param("theta")) theta = parseTheta(req.get_param_value("theta"));
                 if (policy || theta) service.configureSession(id, policy, theta);
                 res.set_chunked_content_provider(
                     "application/x-ndjson", [this, id, steps](std::size_t, httplib::DataSink &sink) {
                       try {
                         service.streamTicks(id, steps, [&sink](const json &record) {
                           const auto line = dumpJson(record) + "\n";
                           return sink.write(line.data(), line.size());
                         });
                       } catch (const Error &e) {
                         const auto line = dumpJson({{"type", "error"}, {"error", e.code()}, {"detail", e.what()}}) + "\n";
                         sink.write(line.data(), line.size());
                       }
                       sink.done();
                       return true;
                     });
               }));
  }
};

HttpServer::HttpServer(Service &service) : impl_(std::make_unique<Impl>(service)) {}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string &host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpServer::listen() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

void HttpServer::waitUntilReady() const { impl_->server.wait_until_ready(); }

}  // namespace sitfuzz
