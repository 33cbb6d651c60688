#pragma once

#include <span>
#include <string>
#include <vector>

#include "sitfuzz/plant.hpp"
#include "sitfuzz/situational.hpp"

namespace sitfuzz {

/// Estimates combined by the composite reasoning rule: dialog (mu_D),
/// generalization (mu_T), control process (mu_phi) and premise conformity.
struct EvidenceBundle {
  double mu_D = 1.0;
  double mu_T = 1.0;
  double mu_phi = 1.0;
  double conformity = 1.0;
  std::string source;  // act the bundle supports

  double conjunction() const;
};

/// max over bundles of min(mu_D, mu_T, mu_phi, conformity).
/// Throws EmptyEvidence.
double combineEvidence(std::span<const EvidenceBundle> bundles);

struct Alternative {
  Decision decision;
  std::vector<EvidenceBundle> evidence;
  double combined_score = 0.0;
};

enum class Policy {
  Wisdom,    // every act group, merged
  Intuition  // only the best-matching act, unmerged
};

std::string_view toString(Policy policy);
Policy policyFromString(std::string_view text);

struct ReasoningContext {
  double dialog_confidence = 1.0;  // 1.0 for system-initiated cycles
  double threshold = kDefaultThreshold;
  Policy policy = Policy::Wisdom;
};

/// Possibility of `current` against the α-cut (α = threshold) of `stored`,
/// the cut taken as a crisp set. A threshold of 0 cuts the whole universe.
double cutConformity(const FuzzySet &current, const FuzzySet &stored, double threshold);

/// min of cutConformity over the variables shared by `current` and
/// `trigger`; 1 when none is shared.
double premiseConformity(const Situation &current, const Situation &trigger, double threshold);

/// How well `target` is recognised in the KB situation library: the best
/// match score, or 1 when no library situation shares a variable with it.
double generalizationEstimate(const Situation &target, const KnowledgeBase &kb);

/// One alternative per act group (every act considered), each scored by the
/// composite rule, ordered by combined score descending then decision id.
/// All alternatives share one enumeration trace.
std::vector<Alternative> enumerateAlternatives(const FullSituation &current, const KnowledgeBase &kb,
                                               const ReasoningContext &context = {});

/// The alternative with the highest combined score (ties by id); its decision
/// carries the enumeration trace closed by a decision step.
/// Throws NoAlternatives.
Decision decide(std::span<const Alternative> alternatives);

struct PlanStep {
  Decision decision;
  Situation predicted_situation;
  EnvironmentState predicted_state;
};

struct Plan {
  std::vector<PlanStep> steps;
  int horizon = 0;
};

class PlanningStalled : public Error {
 public:
  PlanningStalled(Plan partial, const std::string &detail) : Error("PlanningStalled", detail), partial_(std::move(partial)) {}
  const Plan &partial() const noexcept { return partial_; }

 private:
  Plan partial_;
};

/// Greedy rollout: decide on the current situation, step the plant model
/// with the decision's impacts and no disturbance, observe, repeat.
/// Throws PlanningStalled when a step has no alternatives.
Plan plan(const FullSituation &current, int horizon, const KnowledgeBase &kb, const ReasoningContext &context = {});

}  // namespace sitfuzz
