#include <doctest.h>

#include <fstream>
#include <random>

#include "sitfuzz/service.hpp"
#include "support.hpp"

using namespace sitfuzz;
using nlohmann::json;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    std::random_device rd;
    path = std::filesystem::temp_directory_path() / ("sitfuzz-test-" + std::to_string(rd()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

std::unique_ptr<Service> makeService(std::optional<std::filesystem::path> logs = std::nullopt) {
  auto svc = std::make_unique<Service>(std::move(logs));
  svc->loadKnowledgeBaseDirectory(testsupport::dataPath(""));
  return svc;
}

std::string open(Service &svc, const std::string &language = "en", const std::string &kb = "inventory") {
  SessionConfig c;
  c.kb_id = kb;
  c.language = language;
  return svc.createSession(c);
}

std::vector<std::string> lines(const std::filesystem::path &path) {
  std::ifstream in(path);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("registry and session creation") {
  auto svc = makeService();
  CHECK(svc->knowledgeBase("inventory")->acts.size() == 5);
  CHECK(svc->knowledgeBase("coarse_plant")->plant.setpoint == std::nullopt);
  CHECK_THROWS_AS(svc->knowledgeBase("nope"), UnknownKB);

  const auto a = open(*svc);
  const auto b = open(*svc, "es");
  CHECK(a != b);
  CHECK(svc->hasSession(a));
  CHECK_FALSE(svc->hasSession("s-999"));
  CHECK_THROWS_AS(open(*svc, "fr"), UnsupportedLanguage);
  CHECK_THROWS_AS(open(*svc, "en", "missing"), UnknownKB);
  SessionConfig bad;
  bad.kb_id = "inventory";
  bad.threshold = 1.5;
  CHECK_THROWS_AS(svc->createSession(bad), DomainError);
  CHECK_THROWS_AS(svc->dialogTurn("s-999", "decide"), UnknownSession);

  CHECK_THROWS_AS(svc->putKnowledgeBaseDocument("{}"), SchemaError);
  const auto id = svc->putKnowledgeBaseDocument(testsupport::readFile(testsupport::dataPath("inventory.kb.json")));
  CHECK(id.rfind("kb-", 0) == 0);
}

TEST_CASE("session config json") {
  SessionConfig c;
  c.kb_id = "inventory";
  c.policy = Policy::Intuition;
  c.seed = 7;
  c.disturbance_bounds["demand_actual"] = {-1, 2};
  const auto back = SessionConfig::fromJson(c.toJson());
  CHECK(back.toJson() == c.toJson());
  CHECK_THROWS_AS(SessionConfig::fromJson(json::array()), SchemaError);
  CHECK_THROWS_AS(SessionConfig::fromJson(json{{"language", "en"}}), SchemaError);
  CHECK_THROWS_AS(SessionConfig::fromJson(json{{"kb", "inventory"}, {"policy", "luck"}}), Error);
}

TEST_CASE("dialog turns") {
  auto svc = makeService();
  const auto s = open(*svc);

  // Nothing asserted: stock comes from the plant, order from inference.
  auto r = svc->dialogTurn(s, "what is stock");
  CHECK(r.kind == "answer");
  CHECK(r.payload["source"] == "observation");
  CHECK(r.payload["term"] == "low");
  r = svc->dialogTurn(s, "what is order");
  CHECK(r.payload["source"] == "inference");
  CHECK(r.payload["term"] == "large");

  r = svc->dialogTurn(s, "set stock to low");
  CHECK(r.kind == "answer");
  CHECK(r.text == "Noted: stock is low.");
  CHECK(r.mu_D == 1.0);
  svc->dialogTurn(s, "set demand to high");

  r = svc->dialogTurn(s, "what should i do");
  CHECK(r.kind == "decision");
  CHECK(r.payload["decision_id"] == "restock_act");
  CHECK(r.payload["score"] == 1.0);
  CHECK(r.payload["alternatives"].size() == 4);
  CHECK(r.text == "Decision restock_act (score 1): order large. Impacts: order +40.");

  r = svc->dialogTurn(s, "why last decision");
  CHECK(r.kind == "explanation");
  CHECK(r.payload["decision_id"] == "restock_act");
  CHECK(r.payload["steps"][0]["kind"] == "decision");
  CHECK(r.payload == svc->explanation(s, "restock_act"));
  CHECK_THROWS_AS(svc->explanation(s, "hold_act"), UnknownDecision);

  r = svc->dialogTurn(s, "plan 3 steps");
  CHECK(r.kind == "plan");
  REQUIRE(r.payload["steps"].size() == 3);
  CHECK(r.payload["steps"][0]["state"]["stock"] == 45.0);

  r = svc->dialogTurn(s, "apply hold_act");
  CHECK(r.kind == "answer");
  CHECK(r.payload["conformity"] == 0.25);
  CHECK(svc->getState(s)["pending_override"] == "hold_act");

  const auto state = svc->getState(s);
  CHECK(state["history_length"] == 8);
  CHECK(state["decisions"] == 1);
  CHECK(state["premises"]["stock"]["term"] == "low");
  CHECK(state["situation"]["demand"]["term"] == "high");
  CHECK(state["plant"]["stock"] == 10.0);
  CHECK(svc->history(s).size() == 8);
  CHECK((svc->history(s)[0].act->kind == DialogKind::Query));
}

TEST_CASE("bad input becomes a clarification") {
  auto svc = makeService();
  const auto s = open(*svc);
  const std::vector<std::pair<std::string, std::string>> cases{
      {"frobnicate", "unknown-words"}, {"what is level", "ambiguous"},  {"set demand", "no-parse"},
      {"", "no-parse"},                {"why hold_act", "failure"},     {"plan 99 steps", "failure"},
      {"why last decision", "failure"}};
  for (const auto &[utterance, reason] : cases) {
    CAPTURE(utterance);
    const auto r = svc->dialogTurn(s, utterance);
    CHECK(r.kind == "clarification");
    CHECK(r.payload["reason"] == reason);
    CHECK(r.mu_D == 0.0);
    CHECK_FALSE(r.text.empty());
  }
  CHECK(svc->dialogTurn(s, "what is level").text ==
        "'level' is ambiguous between stock or demand. Which one do you mean?");

  const auto es = open(*svc, "es");
  CHECK(svc->dialogTurn(es, "¿qué es nivel?").payload["items"] == json{"stock", "demand"});
  CHECK(svc->dialogTurn(es, "fija demanda en alta").text == "Entendido: demanda es alta.");
}

TEST_CASE("random bytes never escape as exceptions") {
  auto svc = makeService();
  const auto s = open(*svc);
  const std::vector<std::string> words{"set", "demand", "to", "high", "what", "is", "why", "plan", "3", "apply",
                                       "none", "level", "stock", "steps", "last", "decision", "\xc3", "\xff"};
  testsupport::Rng rng(5);
  for (int n = 0; n < 2000; ++n) {
    std::string text;
    const int parts = static_cast<int>(rng() % 6);
    for (int i = 0; i < parts; ++i) {
      if (rng() % 2) {
        text += words[rng() % words.size()];
      } else {
        for (int k = static_cast<int>(rng() % 4); k >= 0; --k) text += static_cast<char>(rng() % 256);
      }
      text += ' ';
    }
    TurnResponse r;
    REQUIRE_NOTHROW(r = svc->dialogTurn(s, text));
    CHECK_FALSE(r.text.empty());
    CHECK(json::parse(dumpJson(r.toJson())).is_object());
  }
}

TEST_CASE("sessions are isolated and pinned to their KB snapshot") {
  auto svc = makeService();
  const auto a = open(*svc);
  const auto b = open(*svc);
  svc->dialogTurn(a, "set demand to high");
  CHECK(svc->getState(a)["premises"].contains("demand"));
  CHECK(svc->getState(b)["premises"].empty());

  KnowledgeBase replaced = *svc->knowledgeBase("inventory");
  replaced.acts.clear();
  svc->putKnowledgeBase("inventory", replaced);
  CHECK(svc->dialogTurn(a, "decide").kind == "decision");
  const auto c = open(*svc);
  CHECK(svc->dialogTurn(c, "decide").payload["reason"] == "failure");
}

TEST_CASE("tick streaming") {
  auto svc = makeService();
  const auto s = open(*svc);
  svc->dialogTurn(s, "apply hold_act");
  std::vector<json> records;
  svc->streamTicks(s, 20, [&](const json &j) {
    records.push_back(j);
    return true;
  });
  REQUIRE(records.size() == 21);
  CHECK(records[0]["override"] == true);
  CHECK(records[0]["state"]["stock"] == 5.0);
  CHECK(records[0]["csv"] == "1,5,5,0,hold_act,0");
  CHECK(records[1]["decision_id"] == "restock_steady_act");
  CHECK(records.back()["type"] == "summary");
  CHECK(records.back()["in_setpoint"] == true);
  CHECK(svc->getState(s)["tick"] == 20);

  std::vector<json> partial;
  svc->streamTicks(s, 10, [&](const json &j) {
    partial.push_back(j);
    return partial.size() < 2;
  });
  CHECK(partial.size() == 3);
  CHECK(partial.back()["steps"] == 2);
  CHECK(svc->getState(s)["tick"] == 22);
  CHECK_THROWS_AS(svc->streamTicks(s, -1, [](const json &) { return true; }), DomainError);
}

TEST_CASE("session logs replay identically") {
  TempDir dir;
  auto svc = makeService(dir.path);
  const auto s = open(*svc, "es");
  for (const char *u : {"¿cuál es inventario?", "fija demanda en alta", "¿qué debo hacer?", "¿por qué última decisión?",
                        "aplica hold_act", "xyzzy", "planifica 2 pasos"}) {
    svc->dialogTurn(s, u);
  }
  svc->streamTicks(s, 4, [](const json &) { return true; });
  svc->dialogTurn(s, "decide");
  svc->dialogTurn(s, "¿por qué última decisión?");

  const auto log = *svc->logPath(s);
  const auto original = lines(log);
  REQUIRE(original.size() == 1 + 9 + 1);

  auto fresh = makeService(dir.path);
  const auto replay = fresh->replayLog(log);
  CHECK(replay.turns == 9);
  CHECK(replay.mismatched_turns.empty());
  CHECK(replay.session != s);  // the original log file is never reused

  // Everything after the session header is byte-identical.
  const auto again = lines(*fresh->logPath(replay.session));
  REQUIRE(again.size() == original.size());
  for (std::size_t i = 1; i < again.size(); ++i) CHECK(again[i] == original[i]);

  auto missing = std::make_unique<Service>(dir.path);
  CHECK_THROWS_AS(missing->replayLog(log), UnknownKB);
  CHECK_THROWS_AS(fresh->replayLog(dir.path / "none.jsonl"), SchemaError);
}

TEST_CASE("state snapshots") {
  auto svc = makeService();
  const auto s = open(*svc);
  auto state = svc->getState(s);
  CHECK(state["history_length"] == 0);
  CHECK(state["plant"] == json{{"demand_actual", 5.0}, {"order", 0.0}, {"stock", 10.0}});
  CHECK(state["variables"]["demand"]["terms"].size() == 3);
  CHECK(state["variables"]["demand"]["points"].size() == 11);

  svc->dialogTurn(s, "set demand to high");
  state = svc->getState(s);
  CHECK(state["history_length"] == 1);
  CHECK(state["premises"]["demand"]["membership"] == state["variables"]["demand"]["terms"]["high"]);
  CHECK(state["history"][0]["utterance"] == "set demand to high");
}

TEST_CASE("streamed ticks match the trajectory export") {
  auto svc = makeService();
  const auto s = open(*svc);
  std::string csv;
  std::vector<json> records;
  svc->streamTicks(s, 100, [&](const json &j) {
    records.push_back(j);
    return true;
  });
  csv = records.back()["csv_header"].get<std::string>() + "\n0,10,5,0,,0\n";
  for (std::size_t i = 0; i + 1 < records.size(); ++i) csv += records[i]["csv"].get<std::string>() + "\n";
  CHECK(csv == testsupport::readFile(testsupport::goldenPath("closed_loop.csv")));
  const auto stock = svc->getState(s)["plant"]["stock"].get<double>();
  CHECK(stock >= 40.0);
  CHECK(stock <= 60.0);

  std::vector<json> none;
  svc->streamTicks(s, 0, [&](const json &j) {
    none.push_back(j);
    return true;
  });
  REQUIRE(none.size() == 1);
  CHECK(none[0]["type"] == "summary");
}

TEST_CASE("policy and threshold can change mid-session") {
  auto svc = makeService();
  const auto s = open(*svc);
  svc->dialogTurn(s, "set stock to low");
  svc->dialogTurn(s, "set demand to high");
  CHECK(svc->dialogTurn(s, "decide").payload["policy"] == "wisdom");
  svc->configureSession(s, Policy::Intuition, 0.75);
  const auto r = svc->dialogTurn(s, "decide");
  CHECK(r.payload["policy"] == "intuition");
  CHECK(r.payload["theta"] == 0.75);
  CHECK(r.payload["alternatives"].size() == 1);
  CHECK(svc->getState(s)["config"]["theta"] == 0.75);
  CHECK_THROWS_AS(svc->configureSession(s, std::nullopt, 2.0), DomainError);
}

TEST_CASE("interleaved sessions answer as if run alone") {
  const std::vector<std::string> a{"set stock to low", "what is order", "decide", "apply boost_act", "why last decision"};
  const std::vector<std::string> b{"set demand to low", "set stock to high", "what should i do", "plan 2 steps",
                                   "what is stock"};
  auto serial = makeService();
  const auto sa = open(*serial);
  const auto sb = open(*serial);
  std::vector<TurnResponse> alone_a, alone_b;
  for (const auto &u : a) alone_a.push_back(serial->dialogTurn(sa, u));
  for (const auto &u : b) alone_b.push_back(serial->dialogTurn(sb, u));

  auto mixed = makeService();
  const auto ma = open(*mixed);
  const auto mb = open(*mixed);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(mixed->dialogTurn(mb, b[i]) == alone_b[i]);
    CHECK(mixed->dialogTurn(ma, a[i]) == alone_a[i]);
  }
}

TEST_CASE("sessions survive a restart") {
  TempDir dir;
  std::string id;
  json before, decided;
  {
    auto svc = makeService(dir.path);
    id = open(*svc);
    svc->dialogTurn(id, "set stock to low");
    decided = svc->dialogTurn(id, "decide").payload["decision_id"];
    svc->configureSession(id, Policy::Intuition, std::nullopt);
    svc->streamTicks(id, 3, [](const json &) { return true; });
    before = svc->getState(id);
  }
  auto svc = makeService(dir.path);
  CHECK(svc->restoreSessions() == std::vector<std::string>{id});
  CHECK(svc->getState(id) == before);
  CHECK(svc->dialogTurn(id, "why last decision").kind == "explanation");
  CHECK(svc->explanation(id, decided.get<std::string>())["decision_id"] == decided);

  // New turns append to the same log.
  const auto restarted = lines(*svc->logPath(id));
  CHECK(restarted.back().find("why last decision") != std::string::npos);
  CHECK(open(*svc) != id);

  Service empty(dir.path);
  CHECK(empty.restoreSessions().empty());  // no KBs registered
}

TEST_CASE("recorded dialog replays byte for byte") {
  TempDir dir;
  auto svc = makeService(dir.path);
  const auto golden = testsupport::goldenPath("dialog_session.jsonl");
  const auto replay = svc->replayLog(golden);
  CHECK(replay.turns == 20);
  CHECK(replay.mismatched_turns.empty());
  const auto recorded = lines(golden);
  const auto again = lines(*svc->logPath(replay.session));
  REQUIRE(again.size() == recorded.size());
  for (std::size_t i = 1; i < again.size(); ++i) CHECK(again[i] == recorded[i]);
}
