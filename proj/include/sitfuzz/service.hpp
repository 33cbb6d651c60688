#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sitfuzz/closed_loop.hpp"
#include "sitfuzz/inference.hpp"
#include "sitfuzz/language.hpp"

namespace sitfuzz {

struct SessionConfig {
  std::string kb_id;
  std::string language = "en";
  Policy policy = Policy::Wisdom;
  double threshold = kDefaultThreshold;
  /// Seeded disturbance for the session's simulator; none when empty.
  std::uint64_t seed = 0;
  std::map<std::string, std::pair<double, double>> disturbance_bounds;

  nlohmann::json toJson() const;
  /// Throws SchemaError.
  static SessionConfig fromJson(const nlohmann::json &j);
};

struct TurnResponse {
  std::string kind;  // answer | decision | plan | explanation | clarification | error
  nlohmann::json payload;
  std::string text;
  double mu_D = 0.0;

  nlohmann::json toJson() const;
  bool operator==(const TurnResponse &) const = default;
};

struct HistoryEntry {
  std::string utterance;
  std::optional<DialogAct> act;
  TurnResponse response;
};

/// Serializes JSON for the wire; invalid UTF-8 becomes U+FFFD.
std::string dumpJson(const nlohmann::json &j, int indent = -1);

/// Premises from `{variable: term label | crisp number | [membership...]}`.
/// Throws SchemaError, UnknownVariable, RangeError.
PremiseVector premisesFromJson(const nlohmann::json &j, const KnowledgeBase &kb);
/// Outputs with their best term and centroid, rule activations, defaulted
/// premises.
nlohmann::json inferenceToJson(const InferenceResult &result, const KnowledgeBase &kb);

/// Session host shared by the HTTP server, the REPL and the bindings.
/// Knowledge bases are immutable snapshots: replacing one never affects
/// sessions already pinned to the previous version. Turns on one session
/// are serialized; different sessions run concurrently.
class Service {
 public:
  /// Session logs go to `log_dir` as `<session>.jsonl` when set.
  explicit Service(std::optional<std::filesystem::path> log_dir = std::nullopt);
  ~Service();

  Service(const Service &) = delete;
  Service &operator=(const Service &) = delete;

  /// Registers (or replaces) `id`. Returns the id.
  std::string putKnowledgeBase(const std::string &id, KnowledgeBase kb);
  /// Loads and registers a KB document; the id defaults to `kb-<n>`.
  /// Throws SchemaError or IntegrityError.
  std::string putKnowledgeBaseDocument(std::string_view document, std::optional<std::string> id = std::nullopt);
  /// Registers every `<id>.kb.json` under `dir`; returns the ids.
  std::vector<std::string> loadKnowledgeBaseDirectory(const std::filesystem::path &dir);
  /// Throws UnknownKB.
  KnowledgeBasePtr knowledgeBase(const std::string &id) const;
  std::vector<std::string> knowledgeBaseIds() const;

  /// Throws UnknownKB, UnsupportedLanguage or DomainError (threshold).
  std::string createSession(const SessionConfig &config);
  bool hasSession(const std::string &id) const;

  /// Never throws for bad input; only UnknownSession.
  TurnResponse dialogTurn(const std::string &session, std::string_view utterance);

  /// Changes the policy and/or threshold used by later decisions and ticks.
  /// Throws UnknownSession, DomainError.
  void configureSession(const std::string &session, std::optional<Policy> policy, std::optional<double> threshold);

  /// Plant state, observed situation, premises, last decision, transcript.
  nlohmann::json getState(const std::string &session) const;

  /// Reverse-ordered trace of a logged decision. Throws UnknownSession,
  /// UnknownDecision.
  nlohmann::json explanation(const std::string &session, const std::string &decision_id) const;

  /// Advances the session's simulator `steps` ticks, emitting one record per
  /// tick and a final summary record. The sink returns false to stop early
  /// (the summary is still emitted). Throws UnknownSession, DomainError.
  void streamTicks(const std::string &session, int steps, const std::function<bool(const nlohmann::json &)> &sink);

  std::vector<HistoryEntry> history(const std::string &session) const;

  struct Replay {
    std::string session;
    std::size_t turns = 0;
    std::vector<std::size_t> mismatched_turns;
  };
  /// Rebuilds a session from its log in a fresh session (requires the KB id
  /// to be registered) and compares every turn response.
  Replay replayLog(const std::filesystem::path &log);

  /// Rebuilds every logged session under its original id so history and
  /// explanations survive a restart. Logs whose KB is not registered are
  /// skipped. Returns the restored ids.
  std::vector<std::string> restoreSessions();

  std::optional<std::filesystem::path> logPath(const std::string &session) const;

 private:
  struct Session;
  std::shared_ptr<Session> session(const std::string &id) const;

  std::optional<std::filesystem::path> log_dir_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, KnowledgeBasePtr> kbs_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::size_t next_session_ = 1;
  std::size_t next_kb_ = 1;
};

}  // namespace sitfuzz
