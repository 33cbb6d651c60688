#pragma once

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sitfuzz/kb.hpp"

namespace sitfuzz {

/// Default applicability threshold for acts and α-cuts.
inline constexpr double kDefaultThreshold = 0.5;

struct SituationMatch {
  std::string situation_ref;
  double score = 0.0;  // min over per_variable
  std::map<std::string, double> per_variable;
};

/// Conformity of `current` to `pattern` over their shared variables, or
/// nullopt when they share none.
std::optional<SituationMatch> matchPattern(const Situation &current, const Situation &pattern);

/// One match per library situation sharing a variable with `current`, by
/// score descending then id ascending. Throws EmptyLibrary.
std::vector<SituationMatch> matchSituation(const Situation &current, std::span<const Situation> library);

enum class StepKind { SituationMatch, RuleActivation, ActApplication, Merge, EvidenceCombination, Decision };

std::string_view toString(StepKind kind);

struct TraceStep {
  StepKind kind = StepKind::SituationMatch;
  std::string ref;
  double degree = 0.0;
  std::string text;
  /// Contributing acts and their conformities (merge steps only).
  std::vector<std::pair<std::string, double>> members;
};

/// Forward-ordered record of how a decision was reached.
struct ExplanationTrace {
  std::vector<TraceStep> steps;
  std::string final_decision_ref;
  double threshold = 0.0;
};

using TracePtr = std::shared_ptr<const ExplanationTrace>;

struct Decision {
  std::string id;  // id of the leading act of the chosen group
  std::string act_ref;
  double score = 0.0;
  std::vector<ImpactRule> impacts;
  Situation target;
  TracePtr rationale;
};

struct ActApplication {
  Situation target;
  std::vector<ImpactRule> impacts;
  double conformity = 0.0;
};

/// Fires `act` from `full` when its trigger conforms at least `threshold`.
/// The returned target carries the act's u and w vectors in its annotation.
/// Throws BelowThreshold.
ActApplication applyElementaryAct(const FullSituation &full, const ElementaryAct &act, double threshold);
/// Same, looking the act up by id. Throws UnknownAct.
ActApplication applyElementaryAct(const FullSituation &full, std::string_view act_id, const KnowledgeBase &kb,
                                  double threshold);

struct RankedAct {
  const ElementaryAct *act = nullptr;
  double conformity = 0.0;
};

/// Every act with its trigger conformity, conformity descending then id.
std::vector<RankedAct> rankActs(const Situation &current, const KnowledgeBase &kb);

/// Acts that share the same impacts, with their targets merged by pointwise
/// maximum. Members are ordered like rankActs; the first is the leader.
struct ActGroup {
  std::vector<RankedAct> members;
  Situation target;
  std::vector<ImpactRule> impacts;

  const ElementaryAct &leader() const { return *members.front().act; }
  double score() const { return members.front().conformity; }
};

/// Groups the ranked acts at or above `threshold`; groups ordered by score
/// descending then leader id.
std::vector<ActGroup> groupActs(std::span<const RankedAct> ranked, double threshold);

/// Pointwise-maximum merge of the group's targets.
Situation mergeTargets(std::span<const RankedAct> members);

/// Trace steps shared by generalize and alternative enumeration: one match
/// step per ranked act, one application per grouped act, one merge per
/// multi-act group, and rule-activation steps for rules supporting the
/// chosen target.
void appendMatchSteps(ExplanationTrace &trace, std::span<const RankedAct> ranked);
void appendGroupSteps(ExplanationTrace &trace, std::span<const ActGroup> groups);
void appendRuleSupport(ExplanationTrace &trace, const Situation &current, const Situation &target,
                       const KnowledgeBase &kb);
void appendDecisionStep(ExplanationTrace &trace, const Decision &decision);

struct Generalization {
  Situation target;
  Decision decision;
};

/// Ranks all acts by conformity, merges the targets of the acts above the
/// threshold that share impacts, and decides for the best group.
/// Throws NoApplicableSituation.
Generalization generalize(const Situation &current, const KnowledgeBase &kb, double threshold = kDefaultThreshold);

/// Append-only decision history of a session.
class DecisionLog {
 public:
  void append(Decision decision) { decisions_.push_back(std::move(decision)); }
  /// Most recent decision with `id`, or null.
  const Decision *find(std::string_view id) const;
  const Decision *last() const { return decisions_.empty() ? nullptr : &decisions_.back(); }
  std::size_t size() const { return decisions_.size(); }
  const std::vector<Decision> &decisions() const { return decisions_; }

 private:
  std::vector<Decision> decisions_;
};

struct Explanation {
  std::string decision_id;
  double score = 0.0;
  std::vector<TraceStep> steps;  // decision first, raw matches last
};

/// Replays the decision's trace in reverse. Throws UnknownDecision.
Explanation explain(std::string_view decision_id, const DecisionLog &log);

/// `step <n>: <kind> <id> degree=<d>: <text>`, numbered from 1.
std::vector<std::string> renderTrace(std::span<const TraceStep> steps);

struct Replay {
  std::string decision_id;
  double score = 0.0;
};

/// Re-derives the decision from the explained steps alone: acts applied and
/// merged into groups, each group scored by its best evidence bundle (or best
/// conformity when no evidence was combined), best group wins.
Replay replayExplanation(const Explanation &explanation);

}  // namespace sitfuzz
