#include "sitfuzz/situational.hpp"

#include <algorithm>
#include <set>

#include "sitfuzz/format.hpp"
#include "sitfuzz/inference.hpp"

namespace sitfuzz {

namespace {

bool byScoreThenId(double score_a, const std::string &id_a, double score_b, const std::string &id_b) {
  if (score_a != score_b) return score_a > score_b;
  return id_a < id_b;
}

std::string describeImpacts(const std::vector<ImpactRule> &impacts) {
  if (impacts.empty()) return "no impacts";
  std::string out;
  for (const auto &i : impacts) {
    if (!out.empty()) out += ", ";
    out += i.target_variable + (i.mode == ImpactMode::Delta ? (i.value >= 0 ? " +" : " ") : " =") +
           formatNumber(i.value);
  }
  return out;
}

std::string describeVector(const CrispVector &v) {
  std::string out;
  for (const auto &[name, value] : v) {
    if (!out.empty()) out += ",";
    out += name + "=" + formatNumber(value);
  }
  return out;
}

bool sameImpacts(const std::vector<ImpactRule> &a, const std::vector<ImpactRule> &b) {
  return std::equal(a.begin(), a.end(), b.begin(), b.end(),
                    [](const ImpactRule &x, const ImpactRule &y) { return x.sameEffect(y); });
}

}  // namespace

std::optional<SituationMatch> matchPattern(const Situation &current, const Situation &pattern) {
  SituationMatch match{pattern.id, 1.0, {}};
  for (const auto &[name, stored] : pattern.assignments) {
    auto it = current.assignments.find(name);
    if (it == current.assignments.end()) continue;
    const double degree = possibility(it->second, stored);
    match.per_variable[name] = degree;
    match.score = std::min(match.score, degree);
  }
  if (match.per_variable.empty()) return std::nullopt;
  return match;
}

std::vector<SituationMatch> matchSituation(const Situation &current, std::span<const Situation> library) {
  if (library.empty()) throw EmptyLibrary("situation library is empty");
  std::vector<SituationMatch> matches;
  for (const auto &stored : library) {
    if (auto m = matchPattern(current, stored)) matches.push_back(std::move(*m));
  }
  std::sort(matches.begin(), matches.end(), [](const auto &a, const auto &b) {
    return byScoreThenId(a.score, a.situation_ref, b.score, b.situation_ref);
  });
  return matches;
}

std::string_view toString(StepKind kind) {
  switch (kind) {
    case StepKind::SituationMatch:
      return "situation-match";
    case StepKind::RuleActivation:
      return "rule-activation";
    case StepKind::ActApplication:
      return "act-application";
    case StepKind::Merge:
      return "merge";
    case StepKind::EvidenceCombination:
      return "evidence-combination";
    case StepKind::Decision:
      return "decision";
  }
  return "unknown";
}

ActApplication applyElementaryAct(const FullSituation &full, const ElementaryAct &act, double threshold) {
  const auto match = matchPattern(full.situation, act.trigger);
  const double conformity = match ? match->score : 0.0;
  if (conformity < threshold) throw BelowThreshold(conformity, threshold);

  ActApplication out{act.target, act.impacts, conformity};
  std::string note = "via " + act.id;
  if (!act.controls.empty()) note += " u{" + describeVector(act.controls) + "}";
  if (!act.disturbances.empty()) note += " w{" + describeVector(act.disturbances) + "}";
  out.target.annotation = out.target.annotation.empty() ? note : out.target.annotation + "; " + note;
  return out;
}

ActApplication applyElementaryAct(const FullSituation &full, std::string_view act_id, const KnowledgeBase &kb,
                                  double threshold) {
  const auto *act = kb.findAct(act_id);
  if (!act) throw UnknownAct(std::string(act_id));
  return applyElementaryAct(full, *act, threshold);
}

std::vector<RankedAct> rankActs(const Situation &current, const KnowledgeBase &kb) {
  std::vector<RankedAct> ranked;
  ranked.reserve(kb.acts.size());
  for (const auto &act : kb.acts) {
    const auto match = matchPattern(current, act.trigger);
    ranked.push_back({&act, match ? match->score : 0.0});
  }
  std::sort(ranked.begin(), ranked.end(), [](const RankedAct &a, const RankedAct &b) {
    return byScoreThenId(a.conformity, a.act->id, b.conformity, b.act->id);
  });
  return ranked;
}

Situation mergeTargets(std::span<const RankedAct> members) {
  if (members.size() == 1) return members.front().act->target;
  Situation merged;
  merged.level = members.front().act->target.level;
  merged.id = "generalized";
  for (const auto &m : members) {
    merged.id += ":" + m.act->target.id;
    for (const auto &[name, set] : m.act->target.assignments) {
      auto [it, inserted] = merged.assignments.try_emplace(name, set);
      if (!inserted) it->second = unionOf(it->second, set);
    }
  }
  return merged;
}

std::vector<ActGroup> groupActs(std::span<const RankedAct> ranked, double threshold) {
  std::vector<ActGroup> groups;
  for (const auto &r : ranked) {
    if (r.conformity < threshold) continue;
    auto it = std::find_if(groups.begin(), groups.end(),
                           [&](const ActGroup &g) { return sameImpacts(g.impacts, r.act->impacts); });
    if (it == groups.end()) {
      groups.push_back({{r}, {}, r.act->impacts});
    } else {
      it->members.push_back(r);
    }
  }
  for (auto &g : groups) g.target = mergeTargets(g.members);
  // Members arrive in rank order, so each group's leader is its best act.
  std::stable_sort(groups.begin(), groups.end(), [](const ActGroup &a, const ActGroup &b) {
    return byScoreThenId(a.score(), a.leader().id, b.score(), b.leader().id);
  });
  return groups;
}

void appendMatchSteps(ExplanationTrace &trace, std::span<const RankedAct> ranked) {
  for (const auto &r : ranked) {
    trace.steps.push_back({StepKind::SituationMatch, r.act->id, r.conformity,
                           "current situation against the trigger of " + r.act->id, {}});
  }
}

void appendGroupSteps(ExplanationTrace &trace, std::span<const ActGroup> groups) {
  for (const auto &g : groups) {
    for (const auto &m : g.members) {
      trace.steps.push_back({StepKind::ActApplication, m.act->id, m.conformity,
                             m.act->id + " applies: " + describeImpacts(m.act->impacts), {}});
    }
  }
  for (const auto &g : groups) {
    if (g.members.size() < 2) continue;
    TraceStep step{StepKind::Merge, g.leader().id, g.score(), "targets of", {}};
    for (const auto &m : g.members) {
      step.members.emplace_back(m.act->id, m.conformity);
      step.text += " " + m.act->id + "(" + formatNumber(m.conformity) + ")";
    }
    step.text += " merged by pointwise maximum";
    trace.steps.push_back(std::move(step));
  }
}

void appendRuleSupport(ExplanationTrace &trace, const Situation &current, const Situation &target,
                       const KnowledgeBase &kb) {
  for (const auto &rule : kb.rules) {
    auto it = target.assignments.find(rule.consequent.variable);
    if (it == target.assignments.end()) continue;
    const auto *variable = kb.findVariable(rule.consequent.variable);
    if (!variable || EstimateMap::of(*variable).verbal(it->second) != rule.consequent.term) continue;
    std::map<std::string, FuzzySet> premises;
    for (const auto &[name, set] : current.assignments) {
      if (kb.findVariable(name)) premises.emplace(name, set);
    }
    const double activation = ruleActivation(rule, premises, kb);
    if (activation <= 0.0) continue;
    trace.steps.push_back({StepKind::RuleActivation, rule.id, activation,
                           "rule " + rule.id + " supports " + rule.consequent.variable + "=" + rule.consequent.term,
                           {}});
  }
}

void appendDecisionStep(ExplanationTrace &trace, const Decision &decision) {
  trace.steps.push_back({StepKind::Decision, decision.id, decision.score,
                         "decide " + decision.id + " with " + describeImpacts(decision.impacts), {}});
  trace.final_decision_ref = decision.id;
}

Generalization generalize(const Situation &current, const KnowledgeBase &kb, double threshold) {
  const auto ranked = rankActs(current, kb);
  const auto groups = groupActs(ranked, threshold);
  if (groups.empty()) {
    throw NoApplicableSituation("no elementary act conforms at threshold " + formatNumber(threshold));
  }
  const auto &best = groups.front();

  auto trace = std::make_shared<ExplanationTrace>();
  trace->threshold = threshold;
  appendMatchSteps(*trace, ranked);
  appendGroupSteps(*trace, groups);
  appendRuleSupport(*trace, current, best.target, kb);

  Decision decision{best.leader().id, best.leader().id, best.score(), best.impacts, best.target, nullptr};
  appendDecisionStep(*trace, decision);
  decision.rationale = std::move(trace);
  return {best.target, std::move(decision)};
}

const Decision *DecisionLog::find(std::string_view id) const {
  for (auto it = decisions_.rbegin(); it != decisions_.rend(); ++it) {
    if (it->id == id) return &*it;
  }
  return nullptr;
}

Explanation explain(std::string_view decision_id, const DecisionLog &log) {
  const auto *decision = log.find(decision_id);
  if (!decision || !decision->rationale) throw UnknownDecision(std::string(decision_id));
  Explanation out{decision->id, decision->score, {}};
  const auto &steps = decision->rationale->steps;
  out.steps.assign(steps.rbegin(), steps.rend());
  return out;
}

std::vector<std::string> renderTrace(std::span<const TraceStep> steps) {
  std::vector<std::string> lines;
  lines.reserve(steps.size());
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const auto &s = steps[i];
    lines.push_back("step " + std::to_string(i + 1) + ": " + std::string(toString(s.kind)) + " " + s.ref +
                    " degree=" + formatNumber(s.degree) + ": " + s.text);
  }
  return lines;
}

Replay replayExplanation(const Explanation &explanation) {
  std::vector<TraceStep> forward(explanation.steps.rbegin(), explanation.steps.rend());

  std::vector<std::pair<std::string, double>> applied;
  std::map<std::string, double> bundle_best;
  bool has_evidence = false;
  std::vector<std::vector<std::pair<std::string, double>>> merges;
  for (const auto &s : forward) {
    switch (s.kind) {
      case StepKind::ActApplication:
        applied.emplace_back(s.ref, s.degree);
        break;
      case StepKind::Merge:
        merges.push_back(s.members);
        break;
      case StepKind::EvidenceCombination: {
        has_evidence = true;
        auto [it, inserted] = bundle_best.try_emplace(s.ref, s.degree);
        if (!inserted) it->second = std::max(it->second, s.degree);
        break;
      }
      default:
        break;
    }
  }

  // Each merge is one group; every other applied act stands alone.
  std::set<std::string> merged;
  std::vector<std::vector<std::pair<std::string, double>>> groups = merges;
  for (const auto &g : merges) {
    for (const auto &[id, degree] : g) merged.insert(id);
  }
  for (const auto &a : applied) {
    if (!merged.count(a.first)) groups.push_back({a});
  }
  if (groups.empty()) throw UnknownDecision(explanation.decision_id + ": trace applies no act");

  std::optional<Replay> best;
  for (const auto &g : groups) {
    double score = 0.0;
    for (const auto &[id, conformity] : g) {
      if (has_evidence) {
        auto it = bundle_best.find(id);
        if (it != bundle_best.end()) score = std::max(score, it->second);
      } else {
        score = std::max(score, conformity);
      }
    }
    const auto &leader = g.front().first;
    if (!best || byScoreThenId(score, leader, best->score, best->decision_id)) best = Replay{leader, score};
  }
  return *best;
}

}  // namespace sitfuzz
