#include <doctest.h>

#include <thread>

#include <httplib.h>

#include "sitfuzz/http_server.hpp"
#include "support.hpp"

using namespace sitfuzz;
using nlohmann::json;

namespace {

struct Running {
  Service service;
  HttpServer server{service};
  int port = -1;
  std::thread thread;

  Running() {
    service.loadKnowledgeBaseDirectory(testsupport::dataPath(""));
    port = server.bind("127.0.0.1", 0);
    REQUIRE(port > 0);
    thread = std::thread([this] { server.listen(); });
    server.waitUntilReady();
  }
  ~Running() {
    server.stop();
    thread.join();
  }

  httplib::Client client() const { return httplib::Client("127.0.0.1", port); }
};

json body(const httplib::Result &r) {
  REQUIRE(r);
  return json::parse(r->body);
}

}  // namespace

TEST_CASE("http: session lifecycle") {
  Running srv;
  auto cli = srv.client();

  auto health = cli.Get("/health");
  REQUIRE(health);
  CHECK(health->status == 200);
  CHECK(body(cli.Get("/kbs"))["kbs"] == json{"coarse_plant", "inventory"});

  auto created = cli.Post("/sessions", R"({"kb":"inventory","language":"en"})", "application/json");
  REQUIRE(created);
  CHECK(created->status == 201);
  const auto id = json::parse(created->body)["id"].get<std::string>();
  const auto turns = "/sessions/" + id + "/turns";

  auto r = cli.Post(turns, R"({"utterance":"set stock to low"})", "application/json");
  REQUIRE(r);
  CHECK(r->status == 200);
  CHECK(json::parse(r->body)["text"] == "Noted: stock is low.");
  cli.Post(turns, R"({"utterance":"set demand to high"})", "application/json");
  const auto decision = body(cli.Post(turns, R"({"utterance":"what should i do"})", "application/json"));
  CHECK(decision["kind"] == "decision");
  CHECK(decision["payload"]["decision_id"] == "restock_act");

  const auto clar = body(cli.Post(turns, R"({"utterance":"what is level"})", "application/json"));
  CHECK(clar["kind"] == "clarification");
  CHECK(clar["payload"]["items"] == json{"stock", "demand"});

  auto explanation = cli.Get("/sessions/" + id + "/decisions/restock_act/explanation");
  REQUIRE(explanation);
  CHECK(explanation->status == 200);
  CHECK(json::parse(explanation->body)["steps"][0]["kind"] == "decision");

  const auto state = body(cli.Get("/sessions/" + id + "/state"));
  CHECK(state["history_length"] == 4);
  CHECK(state["premises"]["stock"]["term"] == "low");

  auto ticks = cli.Get("/sessions/" + id + "/ticks?steps=5");
  REQUIRE(ticks);
  CHECK(ticks->status == 200);
  CHECK(ticks->get_header_value("Content-Type") == "application/x-ndjson");
  std::vector<json> records;
  std::istringstream lines(ticks->body);
  for (std::string line; std::getline(lines, line);) records.push_back(json::parse(line));
  REQUIRE(records.size() == 6);
  CHECK(records[0]["csv"] == "1,45,5,40,restock_steady_act,1");
  CHECK(records[5]["type"] == "summary");
  CHECK(records[5]["in_setpoint"] == true);
  CHECK(body(cli.Get("/sessions/" + id + "/state"))["tick"] == 5);
}

TEST_CASE("http: errors") {
  Running srv;
  auto cli = srv.client();

  auto r = cli.Post("/sessions/s-42/turns", R"({"utterance":"decide"})", "application/json");
  REQUIRE(r);
  CHECK(r->status == 404);
  CHECK(json::parse(r->body)["error"] == "UnknownSession");

  r = cli.Post("/sessions", R"({"kb":"warehouse"})", "application/json");
  CHECK(r->status == 404);
  r = cli.Post("/sessions", "not json", "application/json");
  CHECK(r->status == 400);
  CHECK(json::parse(r->body)["error"] == "SchemaError");
  r = cli.Post("/sessions", R"({"kb":"inventory","language":"fr"})", "application/json");
  CHECK(r->status == 400);
  CHECK(json::parse(r->body)["error"] == "UnsupportedLanguage");

  const auto id = body(cli.Post("/sessions", R"({"kb":"inventory"})", "application/json"))["id"].get<std::string>();
  r = cli.Post("/sessions/" + id + "/turns", R"({"text":"decide"})", "application/json");
  CHECK(r->status == 400);
  r = cli.Get("/sessions/" + id + "/decisions/nope/explanation");
  CHECK(r->status == 404);
  CHECK(json::parse(r->body)["error"] == "UnknownDecision");
  r = cli.Get("/sessions/" + id + "/ticks?steps=abc");
  CHECK(r->status == 400);
  r = cli.Get("/sessions/nope/ticks?steps=1");
  CHECK(r->status == 404);

  r = cli.Post("/kbs", "{}", "application/json");
  CHECK(r->status == 400);
  auto doc = json::parse(testsupport::readFile(testsupport::dataPath("inventory.kb.json")));
  doc["rules"][0]["consequent"]["variable"] = "speed";
  r = cli.Post("/kbs", dumpJson(doc), "application/json");
  CHECK(r->status == 422);
  CHECK(json::parse(r->body)["error"] == "IntegrityError");

  r = cli.Post("/kbs?id=copy", testsupport::readFile(testsupport::dataPath("inventory.kb.json")), "application/json");
  CHECK(r->status == 201);
  CHECK(json::parse(r->body)["id"] == "copy");
}

TEST_CASE("http: concurrent sessions stay independent") {
  Running srv;
  constexpr int kClients = 4;
  std::vector<std::string> texts(kClients);
  std::vector<std::thread> threads;
  for (int c = 0; c < kClients; ++c) {
    threads.emplace_back([&, c] {
      auto cli = srv.client();
      const auto id = json::parse(cli.Post("/sessions", R"({"kb":"inventory"})", "application/json")->body)["id"]
                          .get<std::string>();
      const auto turns = "/sessions/" + id + "/turns";
      const char *level = c % 2 ? R"({"utterance":"set demand to high"})" : R"({"utterance":"set demand to low"})";
      for (int i = 0; i < 10; ++i) cli.Post(turns, level, "application/json");
      texts[c] = json::parse(cli.Post(turns, R"({"utterance":"what is demand"})", "application/json")->body)["text"];
    });
  }
  for (auto &t : threads) t.join();
  for (int c = 0; c < kClients; ++c) {
    CAPTURE(c);
    CHECK(texts[c].rfind(c % 2 ? "demand is high" : "demand is low", 0) == 0);
  }
}
