#include "sitfuzz/service.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>

#include "sitfuzz/inference.hpp"

namespace sitfuzz {

using nlohmann::json;

namespace {

constexpr int kMaxPlanHorizon = 50;

std::string reasonName(Clarification::Reason reason) {
  switch (reason) {
    case Clarification::Reason::UnknownWords:
      return "unknown-words";
    case Clarification::Reason::Ambiguous:
      return "ambiguous";
    case Clarification::Reason::NoParse:
      return "no-parse";
    case Clarification::Reason::Failure:
      return "failure";
  }
  return "failure";
}

json impactsJson(const std::vector<ImpactRule> &impacts) {
  json out = json::array();
  for (const auto &i : impacts) {
    out.push_back({{"variable", i.target_variable},
                   {"mode", i.mode == ImpactMode::Set ? "set" : "delta"},
                   {"value", i.value},
                   {"description", i.description}});
  }
  return out;
}

json dialogActJson(const DialogAct &act) {
  return {{"kind", toString(act.kind)}, {"arguments", act.arguments}, {"confidence", act.confidence},
          {"language", act.language}};
}

std::vector<std::pair<std::string, double>> termDegrees(const FuzzySet &set, const LinguisticVariable &variable) {
  std::vector<std::pair<std::string, double>> out;
  for (const auto &t : variable.terms) out.emplace_back(t.label, possibility(set, t.set));
  return out;
}

json degreesJson(const std::vector<std::pair<std::string, double>> &degrees) {
  json out = json::object();
  for (const auto &[term, degree] : degrees) out[term] = degree;
  return out;
}

/// Everything a session owns. Guarded by `mutex`.
struct SessionState {
  std::string id;
  SessionConfig config;
  KnowledgeBasePtr kb;
  ClosedLoop loop;
  std::map<std::string, FuzzySet> premises;
  DecisionLog decisions;
  std::vector<HistoryEntry> history;
  std::optional<std::string> pending_override;
  std::optional<std::ofstream> log;
  mutable std::mutex mutex;

  SessionState(std::string session_id, SessionConfig cfg, KnowledgeBasePtr pinned, DisturbanceProfile disturbance)
      : id(std::move(session_id)),
        config(std::move(cfg)),
        kb(std::move(pinned)),
        loop(*kb, makePlant(kb->plant)->initialState(), std::move(disturbance), config.policy, config.threshold) {}

  void record(const json &line) {
    if (!log) return;
    *log << dumpJson(line) << '\n';
    log->flush();
  }

  /// Observed plant situation with the operator's asserted premises on top.
  FullSituation current() const {
    auto full = observeFull(loop.state(), *kb);
    full.situation.id = "current@" + std::to_string(full.timestamp);
    for (const auto &[name, set] : premises) full.situation.assignments.insert_or_assign(name, set);
    return full;
  }

  TurnResponse reply(std::string kind, json payload, const Response &response, double mu_D) const {
    return {std::move(kind), std::move(payload), synthesize(response, config.language, *kb), mu_D};
  }

  TurnResponse clarify(Clarification c) const {
    json payload{{"reason", reasonName(c.reason)}, {"items", c.items}, {"subject", c.subject}, {"detail", c.detail}};
    return reply("clarification", std::move(payload), c, 0.0);
  }

  TurnResponse respond(std::string_view utterance, std::optional<DialogAct> &parsed) {
    try {
      parsed = parseUtterance(utterance, config.language, *kb, {kb->dictionary.default_domain});
      return execute(*parsed);
    } catch (const LexicalGap &e) {
      return clarify({Clarification::Reason::UnknownWords, "", e.words(), e.what()});
    } catch (const Ambiguous &e) {
      return clarify({Clarification::Reason::Ambiguous, e.surface(), e.senses(), e.what()});
    } catch (const NoParse &e) {
      return clarify({Clarification::Reason::NoParse, "", {}, e.what()});
    } catch (const std::exception &e) {
      return clarify({Clarification::Reason::Failure, "", {}, e.what()});
    }
  }

  TurnResponse execute(const DialogAct &act) {
    const auto &args = act.arguments;
    switch (act.kind) {
      case DialogKind::Assert: {
        const auto &variable = args.at("variable");
        const auto &term = args.at("term");
        premises.insert_or_assign(variable, kb->findTerm(variable, term)->set);
        json payload{{"act", dialogActJson(act)}, {"variable", variable}, {"term", term}};
        return reply("answer", std::move(payload), Acknowledgement{variable, term}, act.confidence);
      }
      case DialogKind::Query:
        return query(args.at("variable"), act.confidence);
      case DialogKind::Decide:
        return decideNow(act.confidence);
      case DialogKind::Why:
        return why(args.at("decision"), act.confidence);
      case DialogKind::Plan:
        return planAhead(args.at("horizon"), act.confidence);
      case DialogKind::Command:
        return command(args.at("act"), act.confidence);
    }
    throw NoParse("unhandled dialog act");
  }

  TurnResponse query(const std::string &name, double confidence) {
    const auto &variable = kb->variable(name);
    const auto full = current();
    std::string source;
    std::optional<FuzzySet> value;
    if (auto it = premises.find(name); it != premises.end()) {
      source = "premise";
      value = it->second;
    } else if (auto obs = full.situation.assignments.find(name); obs != full.situation.assignments.end()) {
      source = "observation";
      value = obs->second;
    } else {
      PremiseVector inputs;
      for (const auto &[n, set] : full.situation.assignments) {
        if (kb->findVariable(n)) inputs.emplace(n, set);
      }
      const auto inferred = inferAllLevels(inputs, *kb);
      if (auto out = inferred.output.find(name); out != inferred.output.end()) {
        source = "inference";
        value = out->second;
      }
    }
    if (!value) throw UnknownVariable("nothing is known about " + name);

    const auto degrees = termDegrees(*value, variable);
    const auto best = EstimateMap::of(variable).verbal(*value);
    const auto crisp = defuzzify(*value);
    json payload{{"variable", name},     {"source", source},
                 {"degrees", degreesJson(degrees)}, {"term", best},
                 {"value", crisp.value}, {"degenerate", crisp.degenerate},
                 {"membership", value->mu}};
    return reply("answer", std::move(payload), Answer{name, degrees, best, crisp.value}, confidence);
  }

  TurnResponse decideNow(double confidence) {
    const auto full = current();
    const auto alternatives =
        enumerateAlternatives(full, *kb, {confidence, config.threshold, config.policy});
    if (alternatives.empty()) throw NoAlternatives("the knowledge base offers no elementary acts");
    auto decision = decide(alternatives);

    std::vector<std::pair<std::string, std::string>> target_terms;
    json target = json::object();
    for (const auto &[name, set] : decision.target.assignments) {
      if (const auto *v = kb->findVariable(name)) {
        target_terms.emplace_back(name, EstimateMap::of(*v).verbal(set));
        target[name] = target_terms.back().second;
      }
    }
    json ranked = json::array();
    for (const auto &a : alternatives) ranked.push_back({{"id", a.decision.id}, {"score", a.combined_score}});
    json payload{{"decision_id", decision.id}, {"score", decision.score},  {"policy", toString(config.policy)},
                 {"theta", config.threshold},  {"target", target},         {"impacts", impactsJson(decision.impacts)},
                 {"alternatives", ranked},     {"tick", full.timestamp}};
    DecisionReport report{decision.id, decision.score, std::move(target_terms), decision.impacts};
    decisions.append(std::move(decision));
    return reply("decision", std::move(payload), report, confidence);
  }

  TurnResponse why(const std::string &reference, double confidence) {
    std::string id = reference;
    if (reference == kLastDecision) {
      const auto *last = decisions.last();
      if (!last) throw UnknownDecision("no decision has been made yet");
      id = last->id;
    } else if (!decisions.find(id)) {
      throw UnknownDecision("no decision " + id + " has been made in this session");
    }
    const auto e = explain(id, decisions);
    auto lines = renderTrace(e.steps);
    json steps = json::array();
    for (const auto &s : e.steps) {
      steps.push_back({{"kind", toString(s.kind)}, {"ref", s.ref}, {"degree", s.degree}, {"text", s.text}});
    }
    json payload{{"decision_id", e.decision_id}, {"score", e.score}, {"steps", steps}, {"lines", lines}};
    return reply("explanation", std::move(payload), ExplanationReport{e.decision_id, std::move(lines)}, confidence);
  }

  TurnResponse planAhead(const std::string &horizon_text, double confidence) {
    int horizon = -1;
    const auto *end = horizon_text.data() + horizon_text.size();
    const auto [ptr, ec] = std::from_chars(horizon_text.data(), end, horizon);
    if (ec != std::errc() || ptr != end || horizon < 0 || horizon > kMaxPlanHorizon) {
      throw DomainError("plan horizon must be between 0 and " + std::to_string(kMaxPlanHorizon));
    }
    const auto p = plan(current(), horizon, *kb, {confidence, config.threshold, config.policy});
    const std::string reported =
        kb->plant.setpoint ? kb->plant.setpoint->variable
                           : (kb->plant.variables.empty() ? std::string() : kb->plant.variables.front().name);
    PlanReport report;
    json steps = json::array();
    for (const auto &s : p.steps) {
      const auto it = s.predicted_state.variables.find(reported);
      const double value = it == s.predicted_state.variables.end() ? 0.0 : it->second;
      report.steps.push_back({s.decision.id, s.decision.score, reported, value});
      steps.push_back({{"decision_id", s.decision.id},
                       {"score", s.decision.score},
                       {"impacts", impactsJson(s.decision.impacts)},
                       {"state", s.predicted_state.variables},
                       {"tick", s.predicted_state.tick}});
    }
    json payload{{"horizon", p.horizon}, {"steps", steps}, {"reported_variable", reported}};
    return reply("plan", std::move(payload), report, confidence);
  }

  TurnResponse command(const std::string &act_id, double confidence) {
    const auto applied = applyElementaryAct(current(), act_id, *kb, 0.0);
    pending_override = act_id;
    json payload{{"act", act_id}, {"conformity", applied.conformity}, {"pending", true},
                 {"impacts", impactsJson(applied.impacts)}};
    return reply("answer", std::move(payload), CommandReport{act_id, applied.conformity}, confidence);
  }

  TurnResponse turn(std::string_view utterance) {
    HistoryEntry entry{std::string(utterance), std::nullopt, {}};
    entry.response = respond(utterance, entry.act);
    record({{"type", "turn"}, {"utterance", entry.utterance}, {"response", entry.response.toJson()}});
    history.push_back(entry);
    return entry.response;
  }

  void configure(std::optional<Policy> policy, std::optional<double> threshold) {
    if (threshold && !(*threshold >= 0.0 && *threshold <= 1.0)) throw DomainError("theta must be within [0,1]");
    if (policy) config.policy = *policy;
    if (threshold) config.threshold = *threshold;
    loop.setPolicy(config.policy);
    loop.setThreshold(config.threshold);
    record({{"type", "config"}, {"policy", toString(config.policy)}, {"theta", config.threshold}});
  }

  void ticks(int steps, const std::function<bool(const json &)> &sink) {
    if (steps < 0) throw DomainError("steps must be non-negative");
    int emitted = 0;
    for (; emitted < steps; ++emitted) {
      const ElementaryAct *override_act = pending_override ? kb->findAct(*pending_override) : nullptr;
      pending_override.reset();
      auto tick = loop.step(override_act);
      json decision_id = nullptr;
      if (tick.decision) {
        decision_id = tick.decision->id;
        decisions.append(*tick.decision);
      }
      json line{{"type", "tick"},
                {"tick", tick.tick},
                {"state", tick.state.variables},
                {"decision_id", decision_id},
                {"score", tick.score},
                {"override", tick.override_applied},
                {"note", tick.note},
                {"csv", trajectoryCsvRow(tick, kb->plant)}};
      if (!sink(line)) {
        ++emitted;
        break;
      }
    }
    record({{"type", "ticks"}, {"steps", emitted}});

    const auto &state = loop.state();
    json summary{{"type", "summary"},
                 {"steps", emitted},
                 {"tick", state.tick},
                 {"state", state.variables},
                 {"csv_header", trajectoryCsvHeader(kb->plant)}};
    if (kb->plant.setpoint) {
      const auto &sp = *kb->plant.setpoint;
      const auto it = state.variables.find(sp.variable);
      summary["in_setpoint"] = it != state.variables.end() && it->second >= sp.low && it->second <= sp.high;
    }
    sink(summary);
  }

  /// Re-runs one logged record. Returns the response of a turn record.
  std::optional<TurnResponse> apply(const json &line) {
    const auto type = line.value("type", "");
    if (type == "turn") return turn(line.at("utterance").get<std::string>());
    if (type == "ticks") ticks(line.at("steps").get<int>(), [](const json &) { return true; });
    if (type == "config") {
      configure(policyFromString(line.at("policy").get<std::string>()), line.at("theta").get<double>());
    }
    return std::nullopt;
  }
};

std::vector<json> readLog(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot read session log " + path.string());
  std::vector<json> records;
  for (std::string line; std::getline(in, line);) {
    if (line.empty()) continue;
    try {
      records.push_back(json::parse(line));
    } catch (const json::exception &e) {
      throw SchemaError("session log " + path.string() + ": " + e.what());
    }
  }
  if (records.empty() || records.front().value("type", "") != "session") {
    throw SchemaError("session log " + path.string() + " does not start with a session record");
  }
  return records;
}

DisturbanceProfile profileOf(const SessionConfig &config) {
  DisturbanceProfile profile;
  if (!config.disturbance_bounds.empty()) {
    profile.seeded = DisturbanceProfile::Seeded{config.seed, config.disturbance_bounds};
  }
  return profile;
}

}  // namespace

struct Service::Session : SessionState {
  using SessionState::SessionState;
};

PremiseVector premisesFromJson(const json &j, const KnowledgeBase &kb) {
  if (!j.is_object()) throw SchemaError("premises must be an object keyed by variable");
  PremiseVector out;
  for (const auto &[name, value] : j.items()) {
    const auto &variable = kb.variable(name);
    if (value.is_string()) {
      const auto *term = kb.findTerm(name, value.get<std::string>());
      if (!term) throw SchemaError("variable " + name + " has no term " + value.get<std::string>());
      out.emplace(name, term->set);
    } else if (value.is_number()) {
      out.emplace(name, fuzzify(value.get<double>(), variable).singleton);
    } else if (value.is_array()) {
      std::vector<double> mu;
      for (const auto &m : value) {
        if (!m.is_number()) throw SchemaError("membership of " + name + " must be numbers");
        const double degree = m.get<double>();
        if (!(degree >= 0.0 && degree <= 1.0)) throw DomainError("membership of " + name + " outside [0,1]");
        mu.push_back(degree);
      }
      if (mu.size() != variable.universe->points.size()) {
        throw DimensionMismatch("membership of " + name + " has " + std::to_string(mu.size()) + " points, universe has " +
                                std::to_string(variable.universe->points.size()));
      }
      out.emplace(name, FuzzySet(variable.universe, std::move(mu)));
    } else {
      throw SchemaError("premise " + name + " must be a term, a number or a membership array");
    }
  }
  return out;
}

json inferenceToJson(const InferenceResult &result, const KnowledgeBase &kb) {
  json outputs = json::object();
  for (const auto &[name, set] : result.output) {
    const auto crisp = defuzzify(set);
    outputs[name] = {{"membership", set.mu},
                     {"term", EstimateMap::of(kb.variable(name)).verbal(set)},
                     {"centroid", crisp.value},
                     {"degenerate", crisp.degenerate}};
  }
  return {{"outputs", outputs},
          {"activations", result.rule_activations},
          {"defaulted", result.defaulted},
          {"level", result.level ? json(toString(*result.level)) : json(nullptr)}};
}

std::string dumpJson(const json &j, int indent) { return j.dump(indent, ' ', false, json::error_handler_t::replace); }

json SessionConfig::toJson() const {
  json bounds = json::object();
  for (const auto &[name, b] : disturbance_bounds) bounds[name] = {b.first, b.second};
  return {{"kb", kb_id},   {"language", language}, {"policy", toString(policy)},
          {"theta", threshold}, {"seed", seed},    {"disturbance", bounds}};
}

SessionConfig SessionConfig::fromJson(const json &j) {
  try {
    if (!j.is_object()) throw SchemaError("session request must be an object");
    SessionConfig c;
    c.kb_id = j.at("kb").get<std::string>();
    c.language = j.value("language", c.language);
    c.policy = policyFromString(j.value("policy", std::string(toString(c.policy))));
    c.threshold = j.value("theta", c.threshold);
    c.seed = j.value("seed", c.seed);
    if (j.contains("disturbance")) {
      for (const auto &[name, b] : j.at("disturbance").items()) {
        c.disturbance_bounds[name] = {b.at(0).get<double>(), b.at(1).get<double>()};
      }
    }
    return c;
  } catch (const json::exception &e) {
    throw SchemaError(std::string("session request: ") + e.what());
  }
}

json TurnResponse::toJson() const {
  return {{"kind", kind}, {"payload", payload}, {"text", text}, {"mu_D", mu_D}};
}

Service::Service(std::optional<std::filesystem::path> log_dir) : log_dir_(std::move(log_dir)) {
  if (log_dir_) std::filesystem::create_directories(*log_dir_);
}

Service::~Service() = default;

std::string Service::putKnowledgeBase(const std::string &id, KnowledgeBase kb) {
  auto snapshot = std::make_shared<const KnowledgeBase>(std::move(kb));
  std::unique_lock lock(mutex_);
  kbs_[id] = std::move(snapshot);
  return id;
}

std::string Service::putKnowledgeBaseDocument(std::string_view document, std::optional<std::string> id) {
  auto kb = loadKnowledgeBase(document);
  if (!id) {
    std::unique_lock lock(mutex_);
    do {
      id = "kb-" + std::to_string(next_kb_++);
    } while (kbs_.count(*id));
  }
  return putKnowledgeBase(*id, std::move(kb));
}

std::vector<std::string> Service::loadKnowledgeBaseDirectory(const std::filesystem::path &dir) {
  std::vector<std::filesystem::path> files;
  for (const auto &entry : std::filesystem::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (entry.is_regular_file() && name.ends_with(".kb.json")) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<std::string> ids;
  for (const auto &f : files) {
    auto name = f.filename().string();
    name.resize(name.size() - std::string_view(".kb.json").size());
    ids.push_back(putKnowledgeBase(name, loadKnowledgeBaseFile(f.string())));
  }
  return ids;
}

KnowledgeBasePtr Service::knowledgeBase(const std::string &id) const {
  std::shared_lock lock(mutex_);
  auto it = kbs_.find(id);
  if (it == kbs_.end()) throw UnknownKB(id);
  return it->second;
}

std::vector<std::string> Service::knowledgeBaseIds() const {
  std::shared_lock lock(mutex_);
  std::vector<std::string> ids;
  for (const auto &[id, kb] : kbs_) ids.push_back(id);
  return ids;
}

std::string Service::createSession(const SessionConfig &config) {
  auto kb = knowledgeBase(config.kb_id);
  if (!kb->dictionary.supports(config.language)) throw UnsupportedLanguage(config.language);
  if (!(config.threshold >= 0.0 && config.threshold <= 1.0)) throw DomainError("theta must be within [0,1]");

  std::string id;
  {
    std::unique_lock lock(mutex_);
    do {
      id = "s-" + std::to_string(next_session_++);
    } while (sessions_.count(id) || (log_dir_ && std::filesystem::exists(*log_dir_ / (id + ".jsonl"))));
  }
  auto s = std::make_shared<Session>(id, config, kb, profileOf(config));
  if (log_dir_) {
    s->log.emplace(*log_dir_ / (id + ".jsonl"), std::ios::binary | std::ios::app);
    s->record({{"type", "session"}, {"id", id}, {"config", config.toJson()}, {"kb_version", kb->version}});
  }
  std::unique_lock lock(mutex_);
  sessions_.emplace(id, std::move(s));
  return id;
}

bool Service::hasSession(const std::string &id) const {
  std::shared_lock lock(mutex_);
  return sessions_.count(id) > 0;
}

std::shared_ptr<Service::Session> Service::session(const std::string &id) const {
  std::shared_lock lock(mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw UnknownSession(id);
  return it->second;
}

std::optional<std::filesystem::path> Service::logPath(const std::string &id) const {
  if (!log_dir_) return std::nullopt;
  return *log_dir_ / (id + ".jsonl");
}

TurnResponse Service::dialogTurn(const std::string &id, std::string_view utterance) {
  auto s = session(id);
  std::lock_guard lock(s->mutex);
  return s->turn(utterance);
}

void Service::configureSession(const std::string &id, std::optional<Policy> policy, std::optional<double> threshold) {
  auto s = session(id);
  std::lock_guard lock(s->mutex);
  s->configure(policy, threshold);
}

json Service::getState(const std::string &id) const {
  auto s = session(id);
  std::lock_guard lock(s->mutex);
  const auto &kb = *s->kb;
  const auto full = s->current();

  json situation = json::object();
  for (const auto &[name, set] : full.situation.assignments) {
    if (const auto *v = kb.findVariable(name)) {
      situation[name] = {{"term", EstimateMap::of(*v).verbal(set)}, {"degrees", degreesJson(termDegrees(set, *v))},
                         {"membership", set.mu}};
    }
  }
  json premises = json::object();
  for (const auto &[name, set] : s->premises) {
    premises[name] = {{"term", EstimateMap::of(kb.variable(name)).verbal(set)}, {"membership", set.mu}};
  }
  json variables = json::object();
  for (const auto &v : kb.variables) {
    json terms = json::object();
    for (const auto &t : v.terms) terms[t.label] = t.set.mu;
    variables[v.name] = {{"points", v.universe->points}, {"unit", v.universe->unit_label}, {"terms", terms}};
  }
  json transcript = json::array();
  for (const auto &h : s->history) transcript.push_back({{"utterance", h.utterance}, {"response", h.response.toJson()}});
  json last = nullptr;
  if (const auto *d = s->decisions.last()) last = {{"id", d->id}, {"score", d->score}};
  json setpoint = nullptr;
  if (kb.plant.setpoint) {
    setpoint = {{"variable", kb.plant.setpoint->variable},
                {"low", kb.plant.setpoint->low},
                {"high", kb.plant.setpoint->high}};
  }
  return {{"session", s->id},
          {"config", s->config.toJson()},
          {"kb_version", kb.version},
          {"tick", s->loop.state().tick},
          {"plant", s->loop.state().variables},
          {"setpoint", setpoint},
          {"situation", situation},
          {"premises", premises},
          {"variables", variables},
          {"last_decision", last},
          {"decisions", s->decisions.size()},
          {"pending_override", s->pending_override ? json(*s->pending_override) : json(nullptr)},
          {"history_length", s->history.size()},
          {"history", transcript}};
}

json Service::explanation(const std::string &id, const std::string &decision_id) const {
  auto s = session(id);
  std::lock_guard lock(s->mutex);
  const auto e = explain(decision_id, s->decisions);
  json steps = json::array();
  for (const auto &step : e.steps) {
    steps.push_back({{"kind", toString(step.kind)}, {"ref", step.ref}, {"degree", step.degree}, {"text", step.text}});
  }
  return {{"decision_id", e.decision_id}, {"score", e.score}, {"steps", steps}, {"lines", renderTrace(e.steps)}};
}

void Service::streamTicks(const std::string &id, int steps, const std::function<bool(const json &)> &sink) {
  if (steps < 0) throw DomainError("steps must be non-negative");
  auto s = session(id);
  std::lock_guard lock(s->mutex);
  s->ticks(steps, sink);
}

std::vector<HistoryEntry> Service::history(const std::string &id) const {
  auto s = session(id);
  std::lock_guard lock(s->mutex);
  return s->history;
}

Service::Replay Service::replayLog(const std::filesystem::path &path) {
  const auto records = readLog(path);
  Replay out;
  out.session = createSession(SessionConfig::fromJson(records.front().at("config")));
  auto s = session(out.session);
  std::lock_guard lock(s->mutex);
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto response = s->apply(records[i]);
    if (!response) continue;
    if (json::parse(dumpJson(response->toJson())) != records[i].at("response")) out.mismatched_turns.push_back(out.turns);
    ++out.turns;
  }
  return out;
}

std::vector<std::string> Service::restoreSessions() {
  std::vector<std::string> restored;
  if (!log_dir_) return restored;
  std::vector<std::filesystem::path> logs;
  for (const auto &entry : std::filesystem::directory_iterator(*log_dir_)) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") logs.push_back(entry.path());
  }
  std::sort(logs.begin(), logs.end());
  for (const auto &path : logs) {
    const auto id = path.stem().string();
    if (hasSession(id)) continue;
    std::shared_ptr<Session> s;
    try {
      const auto records = readLog(path);
      const auto config = SessionConfig::fromJson(records.front().at("config"));
      s = std::make_shared<Session>(id, config, knowledgeBase(config.kb_id), profileOf(config));
      for (std::size_t i = 1; i < records.size(); ++i) s->apply(records[i]);
    } catch (const Error &) {
      continue;  // unreadable log or KB no longer registered
    } catch (const json::exception &) {
      continue;
    }
    s->log.emplace(path, std::ios::binary | std::ios::app);
    std::unique_lock lock(mutex_);
    sessions_.emplace(id, std::move(s));
    restored.push_back(id);
  }
  return restored;
}

}  // namespace sitfuzz
