#include "sitfuzz/closed_loop.hpp"

#include "sitfuzz/format.hpp"

namespace sitfuzz {

ClosedLoop::ClosedLoop(const KnowledgeBase &kb, EnvironmentState initial, DisturbanceProfile disturbance,
                       Policy policy, double threshold)
    : kb_(kb),
      plant_(makePlant(kb.plant)),
      state_(std::move(initial)),
      disturbance_(std::move(disturbance)),
      policy_(policy),
      threshold_(threshold) {}

TickRecord ClosedLoop::step(const ElementaryAct *override_act) {
  TickRecord record;
  const auto full = observeFull(state_, kb_);
  record.situation = full.situation;

  std::vector<ImpactRule> impacts;
  if (override_act) {
    const auto applied = applyElementaryAct(full, *override_act, 0.0);
    auto trace = std::make_shared<ExplanationTrace>();
    trace->steps.push_back({StepKind::SituationMatch, override_act->id, applied.conformity,
                            "current situation against the trigger of " + override_act->id, {}});
    trace->steps.push_back({StepKind::ActApplication, override_act->id, applied.conformity,
                            override_act->id + " applied by operator override", {}});
    Decision decision{override_act->id, override_act->id, applied.conformity, applied.impacts, applied.target, nullptr};
    appendDecisionStep(*trace, decision);
    decision.rationale = std::move(trace);
    impacts = applied.impacts;
    record.score = decision.score;
    record.decision = std::move(decision);
    record.override_applied = true;
  } else {
    const ReasoningContext context{1.0, threshold_, policy_};
    const auto alternatives = enumerateAlternatives(full, kb_, context);
    if (alternatives.empty()) {
      record.note = "no alternatives; no-op tick";
    } else {
      auto decision = decide(alternatives);
      impacts = decision.impacts;
      record.score = decision.score;
      record.decision = std::move(decision);
    }
  }

  state_ = plant_->step(state_, impacts, disturbance_.next());
  record.tick = state_.tick;
  record.state = state_;
  return record;
}

std::vector<TickRecord> runClosedLoop(const KnowledgeBase &kb, const EnvironmentState &initial, int steps,
                                      const DisturbanceProfile &disturbance, Policy policy, double threshold) {
  if (steps < 0) throw DomainError("steps must be non-negative");
  std::vector<TickRecord> trajectory;
  trajectory.reserve(static_cast<std::size_t>(steps) + 1);
  TickRecord start;
  start.tick = initial.tick;
  start.state = initial;
  trajectory.push_back(std::move(start));

  ClosedLoop loop(kb, initial, disturbance, policy, threshold);
  for (int i = 0; i < steps; ++i) trajectory.push_back(loop.step());
  return trajectory;
}

std::string trajectoryCsvHeader(const PlantSchema &schema) {
  std::string header = "tick";
  for (const auto &v : schema.variables) header += "," + v.name;
  return header + ",decision_id,score";
}

std::string trajectoryCsvRow(const TickRecord &record, const PlantSchema &schema) {
  std::string row = std::to_string(record.tick);
  for (const auto &v : schema.variables) {
    auto it = record.state.variables.find(v.name);
    row += "," + (it == record.state.variables.end() ? std::string() : formatNumber(it->second));
  }
  row += "," + (record.decision ? record.decision->id : std::string());
  row += "," + formatNumber(record.score);
  return row;
}

std::string exportTrajectoryCsv(const std::vector<TickRecord> &trajectory, const PlantSchema &schema) {
  std::string out = trajectoryCsvHeader(schema) + "\n";
  for (const auto &r : trajectory) out += trajectoryCsvRow(r, schema) + "\n";
  return out;
}

}  // namespace sitfuzz
