#include "sitfuzz/reasoning.hpp"

#include <algorithm>

#include "sitfuzz/format.hpp"
#include "sitfuzz/inference.hpp"

namespace sitfuzz {

double EvidenceBundle::conjunction() const { return std::min({mu_D, mu_T, mu_phi, conformity}); }

double combineEvidence(std::span<const EvidenceBundle> bundles) {
  if (bundles.empty()) throw EmptyEvidence("no evidence bundles to combine");
  double best = 0.0;
  for (const auto &b : bundles) best = std::max(best, b.conjunction());
  return best;
}

std::string_view toString(Policy policy) { return policy == Policy::Wisdom ? "wisdom" : "intuition"; }

Policy policyFromString(std::string_view text) {
  if (text == "wisdom") return Policy::Wisdom;
  if (text == "intuition") return Policy::Intuition;
  throw SchemaError("unknown policy '" + std::string(text) + "'");
}

double cutConformity(const FuzzySet &current, const FuzzySet &stored, double threshold) {
  if (!current.sameUniverse(stored) || current.size() != stored.size()) {
    throw UniverseMismatch("conformity over different universes");
  }
  double sup = 0.0;
  for (std::size_t i = 0; i < current.mu.size(); ++i) {
    const bool in_cut = threshold <= 0.0 || stored.mu[i] >= threshold;
    if (in_cut) sup = std::max(sup, current.mu[i]);
  }
  return sup;
}

double premiseConformity(const Situation &current, const Situation &trigger, double threshold) {
  double conformity = 1.0;
  for (const auto &[name, stored] : trigger.assignments) {
    auto it = current.assignments.find(name);
    if (it == current.assignments.end()) continue;
    conformity = std::min(conformity, cutConformity(it->second, stored, threshold));
  }
  return conformity;
}

double generalizationEstimate(const Situation &target, const KnowledgeBase &kb) {
  if (kb.situations.empty()) return 1.0;
  const auto matches = matchSituation(target, kb.situations);
  return matches.empty() ? 1.0 : matches.front().score;
}

std::vector<Alternative> enumerateAlternatives(const FullSituation &current, const KnowledgeBase &kb,
                                               const ReasoningContext &context) {
  const auto ranked = rankActs(current.situation, kb);
  if (ranked.empty()) return {};

  std::vector<ActGroup> groups;
  if (context.policy == Policy::Wisdom) {
    groups = groupActs(ranked, 0.0);
  } else {
    const auto &best = ranked.front();
    groups.push_back({{best}, best.act->target, best.act->impacts});
  }

  auto trace = std::make_shared<ExplanationTrace>();
  trace->threshold = context.threshold;
  appendMatchSteps(*trace, ranked);
  appendGroupSteps(*trace, groups);

  std::vector<Alternative> alternatives;
  alternatives.reserve(groups.size());
  for (const auto &g : groups) {
    Alternative alt;
    const double mu_T = generalizationEstimate(g.target, kb);
    for (const auto &m : g.members) {
      EvidenceBundle bundle{context.dialog_confidence, mu_T, m.conformity,
                            premiseConformity(current.situation, m.act->trigger, context.threshold), m.act->id};
      trace->steps.push_back({StepKind::EvidenceCombination, m.act->id, bundle.conjunction(),
                              "mu_D=" + formatNumber(bundle.mu_D) + " mu_T=" + formatNumber(bundle.mu_T) +
                                  " mu_phi=" + formatNumber(bundle.mu_phi) +
                                  " conformity=" + formatNumber(bundle.conformity),
                              {}});
      alt.evidence.push_back(std::move(bundle));
    }
    alt.combined_score = combineEvidence(alt.evidence);
    alt.decision = Decision{g.leader().id, g.leader().id, alt.combined_score, g.impacts, g.target, nullptr};
    alternatives.push_back(std::move(alt));
  }

  TracePtr shared = std::move(trace);
  for (auto &alt : alternatives) alt.decision.rationale = shared;
  std::stable_sort(alternatives.begin(), alternatives.end(), [](const Alternative &a, const Alternative &b) {
    if (a.combined_score != b.combined_score) return a.combined_score > b.combined_score;
    return a.decision.id < b.decision.id;
  });
  return alternatives;
}

Decision decide(std::span<const Alternative> alternatives) {
  if (alternatives.empty()) throw NoAlternatives("no alternative decisions to choose from");
  const Alternative *best = &alternatives.front();
  for (const auto &alt : alternatives) {
    if (alt.combined_score > best->combined_score ||
        (alt.combined_score == best->combined_score && alt.decision.id < best->decision.id)) {
      best = &alt;
    }
  }
  Decision decision = best->decision;
  auto trace = decision.rationale ? std::make_shared<ExplanationTrace>(*decision.rationale)
                                  : std::make_shared<ExplanationTrace>();
  appendDecisionStep(*trace, decision);
  decision.rationale = std::move(trace);
  return decision;
}

Plan plan(const FullSituation &current, int horizon, const KnowledgeBase &kb, const ReasoningContext &context) {
  if (horizon < 0) throw DomainError("plan horizon must be non-negative");
  Plan out;
  out.horizon = horizon;
  if (horizon == 0) return out;

  const auto plant = makePlant(kb.plant);
  FullSituation full = current;
  for (int step = 0; step < horizon; ++step) {
    const auto alternatives = enumerateAlternatives(full, kb, context);
    if (alternatives.empty()) {
      Plan partial = out;
      partial.horizon = static_cast<int>(partial.steps.size());
      throw PlanningStalled(std::move(partial), "no alternatives at plan step " + std::to_string(step + 1));
    }
    auto decision = decide(alternatives);
    auto next = plant->step(full.environment, decision.impacts, {});
    auto predicted = observe(next, kb);
    out.steps.push_back({std::move(decision), predicted, next});
    full = FullSituation{std::move(predicted), next, next.tick};
  }
  return out;
}

}  // namespace sitfuzz
