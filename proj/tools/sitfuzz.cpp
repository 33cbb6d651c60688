// sitfuzz: validate, infer, simulate, talk to and serve knowledge bases.
//
// Exit codes: 0 success, 1 usage or runtime error, 2 invalid knowledge base.

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "sitfuzz/http_server.hpp"
#include "sitfuzz/service.hpp"

using namespace sitfuzz;
using nlohmann::json;

namespace {

constexpr int kUsage = 1;
constexpr int kBadKb = 2;

std::string env(const char *name, std::string fallback) {
  const char *v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

std::string readAll(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot read " + path);
  return {std::istreambuf_iterator<char>(in), {}};
}

int validate(const std::string &path) {
  const auto kb = parseKnowledgeBase(json::parse(readAll(path)));
  const auto report = validateKnowledgeBase(kb);
  const auto summary = report.summary();
  std::cout << (summary.empty() ? "ok" : summary) << '\n';
  return report.ok() ? 0 : kBadKb;
}

int inferCmd(const std::string &kb_path, const std::string &premises_path, const std::string &level) {
  const auto kb = loadKnowledgeBaseFile(kb_path);
  const auto premises = premisesFromJson(json::parse(readAll(premises_path)), kb);
  const auto result = level.empty() ? inferAllLevels(premises, kb) : inferAtLevel(premises, kb, levelFromString(level));
  std::cout << dumpJson(inferenceToJson(result, kb), 2) << '\n';
  return 0;
}

DisturbanceProfile disturbanceFrom(const std::vector<std::string> &specs, std::uint64_t seed) {
  DisturbanceProfile profile;
  if (specs.empty()) return profile;
  DisturbanceProfile::Seeded seeded{seed, {}};
  for (const auto &spec : specs) {
    // variable=low:high
    const auto eq = spec.find('=');
    const auto colon = spec.find(':', eq == std::string::npos ? 0 : eq);
    if (eq == std::string::npos || colon == std::string::npos) {
      throw DomainError("disturbance must look like variable=low:high, got " + spec);
    }
    seeded.bounds[spec.substr(0, eq)] = {std::stod(spec.substr(eq + 1, colon - eq - 1)), std::stod(spec.substr(colon + 1))};
  }
  profile.seeded = seeded;
  return profile;
}

int simulate(const std::string &kb_path, int steps, const std::string &policy, double theta, std::uint64_t seed,
             const std::vector<std::string> &disturb, const std::vector<std::string> &initial) {
  const auto kb = loadKnowledgeBaseFile(kb_path);
  auto start = makePlant(kb.plant)->initialState();
  for (const auto &spec : initial) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || !kb.plant.find(spec.substr(0, eq))) {
      throw DomainError("initial value must look like <plant variable>=<number>, got " + spec);
    }
    start.variables[spec.substr(0, eq)] = std::stod(spec.substr(eq + 1));
  }
  const auto trajectory =
      runClosedLoop(kb, start, steps, disturbanceFrom(disturb, seed), policyFromString(policy), theta);
  std::cout << exportTrajectoryCsv(trajectory, kb.plant);
  return 0;
}

void printTick(const json &record) {
  if (record["type"] == "tick") {
    std::cout << "tick " << record["tick"].get<long>() << ": " << dumpJson(record["state"]);
    if (!record["decision_id"].is_null()) std::cout << " <- " << record["decision_id"].get<std::string>();
    if (record["override"].get<bool>()) std::cout << " (override)";
    std::cout << '\n';
  }
}

int repl(const std::string &kb_path, const std::string &language, const std::string &policy, double theta,
         const std::string &log_dir) {
  Service service(log_dir.empty() ? std::nullopt : std::optional<std::filesystem::path>(log_dir));
  // Registered under its file stem so the session log replays against a KB directory.
  auto kb_id = std::filesystem::path(kb_path).filename().string();
  for (std::string_view suffix : {".kb.json", ".json"}) {
    if (kb_id.size() > suffix.size() && kb_id.ends_with(suffix)) {
      kb_id.resize(kb_id.size() - suffix.size());
      break;
    }
  }
  service.putKnowledgeBase(kb_id, loadKnowledgeBaseFile(kb_path));
  SessionConfig config;
  config.kb_id = kb_id;
  config.language = language;
  config.policy = policyFromString(policy);
  config.threshold = theta;
  const auto session = service.createSession(config);
  std::cerr << "session " << session << ". Commands: :tick [n], :state, :quit\n";

  for (std::string line; std::cout << "> " << std::flush, std::getline(std::cin, line);) {
    if (line == ":quit") break;
    if (line == ":state") {
      std::cout << dumpJson(service.getState(session), 2) << '\n';
    } else if (line.rfind(":tick", 0) == 0) {
      const int n = line.size() > 5 ? std::stoi(line.substr(5)) : 1;
      service.streamTicks(session, n, [](const json &r) {
        printTick(r);
        return true;
      });
    } else {
      std::cout << service.dialogTurn(session, line).text << '\n';
    }
  }
  return 0;
}

HttpServer *running = nullptr;

int serve(const std::string &host, int port, const std::string &kb_dir, const std::string &log_dir) {
  Service service(log_dir.empty() ? std::nullopt : std::optional<std::filesystem::path>(log_dir));
  for (const auto &id : service.loadKnowledgeBaseDirectory(kb_dir)) std::cerr << "loaded " << id << '\n';
  for (const auto &id : service.restoreSessions()) std::cerr << "restored " << id << '\n';
  HttpServer server(service);
  const int bound = server.bind(host, port);
  if (bound < 0) {
    std::cerr << "cannot bind " << host << ':' << port << '\n';
    return kUsage;
  }
  running = &server;
  std::signal(SIGINT, [](int) { running->stop(); });
  std::signal(SIGTERM, [](int) { running->stop(); });
  std::cerr << "listening on " << host << ':' << bound << '\n';
  server.listen();
  running = nullptr;
  return 0;
}

int replay(const std::string &log, const std::string &kb_dir) {
  Service service;
  service.loadKnowledgeBaseDirectory(kb_dir);
  const auto r = service.replayLog(log);
  std::cout << r.turns << " turns replayed, " << r.mismatched_turns.size() << " mismatched\n";
  for (auto t : r.mismatched_turns) std::cout << "  turn " << t << '\n';
  return r.mismatched_turns.empty() ? 0 : kUsage;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Situational fuzzy control: knowledge bases, inference, dialog and simulation"};
  app.require_subcommand(1);

  std::string kb_path, premises_path, level, language = "en", policy = "wisdom", log_path;
  double theta = kDefaultThreshold;
  int steps = 100;
  std::uint64_t seed = 0;
  std::vector<std::string> disturb, initial;
  std::string host = "0.0.0.0";
  int port = std::stoi(env("PORT", "8080"));
  std::string kb_dir = env("KB_DIR", "data");
  std::string log_dir = env("LOG_DIR", "");

  auto *v = app.add_subcommand("validate", "Check a knowledge base document");
  v->add_option("kb", kb_path, "KB JSON file")->required();

  auto *i = app.add_subcommand("infer", "Run compositional inference on a premise file");
  i->add_option("kb", kb_path, "KB JSON file")->required();
  i->add_option("premises", premises_path, "JSON object {variable: term | number | [membership]}")->required();
  i->add_option("--level", level, "Only rules of this level (RX_CODES, USC, SEMANTIC_FRAMES)");

  auto *s = app.add_subcommand("simulate", "Closed-loop run; prints the trajectory as CSV");
  s->add_option("kb", kb_path, "KB JSON file")->required();
  s->add_option("--steps", steps)->check(CLI::NonNegativeNumber);
  s->add_option("--policy", policy)->check(CLI::IsMember({"wisdom", "intuition"}));
  s->add_option("--theta", theta)->check(CLI::Range(0.0, 1.0));
  s->add_option("--seed", seed);
  s->add_option("--disturb", disturb, "Seeded disturbance bounds, variable=low:high");
  s->add_option("--initial", initial, "Initial plant value, variable=value");

  auto *r = app.add_subcommand("repl", "Interactive dialog session on stdin");
  r->add_option("kb", kb_path, "KB JSON file")->required();
  r->add_option("--lang", language);
  r->add_option("--policy", policy)->check(CLI::IsMember({"wisdom", "intuition"}));
  r->add_option("--theta", theta)->check(CLI::Range(0.0, 1.0));
  r->add_option("--log-dir", log_dir);

  auto *sv = app.add_subcommand("serve", "HTTP API (PORT, KB_DIR, LOG_DIR from the environment)");
  sv->add_option("--host", host);
  sv->add_option("--port", port);
  sv->add_option("--kb-dir", kb_dir);
  sv->add_option("--log-dir", log_dir);

  auto *rp = app.add_subcommand("replay", "Re-run a session log and compare every response");
  rp->add_option("log", log_path)->required();
  rp->add_option("--kb-dir", kb_dir);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  try {
    if (*v) return validate(kb_path);
    if (*i) return inferCmd(kb_path, premises_path, level);
    if (*s) return simulate(kb_path, steps, policy, theta, seed, disturb, initial);
    if (*r) return repl(kb_path, language, policy, theta, log_dir);
    if (*sv) return serve(host, port, kb_dir, log_dir);
    if (*rp) return replay(log_path, kb_dir);
  } catch (const IntegrityError &e) {
    std::cerr << e.code() << ": " << e.what() << '\n';
    return kBadKb;
  } catch (const SchemaError &e) {
    std::cerr << e.code() << ": " << e.what() << '\n';
    return kBadKb;
  } catch (const Error &e) {
    std::cerr << e.code() << ": " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception &e) {
    std::cerr << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
