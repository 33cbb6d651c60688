#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sitfuzz/plant.hpp"
#include "sitfuzz/reasoning.hpp"

namespace sitfuzz {

struct TickRecord {
  long tick = 0;
  EnvironmentState state;  // after the tick
  std::optional<Situation> situation;  // observed before deciding
  std::optional<Decision> decision;
  double score = 0.0;
  bool override_applied = false;
  std::string note;
};

/// One simulated unit under situational control. Each step observes the
/// plant, decides under the configured policy, and applies the decision's
/// impacts with the next disturbance. `kb` must outlive the loop.
class ClosedLoop {
 public:
  ClosedLoop(const KnowledgeBase &kb, EnvironmentState initial, DisturbanceProfile disturbance, Policy policy,
             double threshold = kDefaultThreshold);

  const EnvironmentState &state() const { return state_; }
  Policy policy() const { return policy_; }
  double threshold() const { return threshold_; }
  void setPolicy(Policy policy) { policy_ = policy; }
  void setThreshold(double threshold) { threshold_ = threshold; }

  /// Advances one tick. A non-null `override_act` replaces the decided
  /// act. A tick without alternatives is logged as a no-op.
  TickRecord step(const ElementaryAct *override_act = nullptr);

 private:
  const KnowledgeBase &kb_;
  std::unique_ptr<PlantModel> plant_;
  EnvironmentState state_;
  DisturbanceSource disturbance_;
  Policy policy_;
  double threshold_;
};

/// Trajectory of `steps` ticks; element 0 is the initial state.
std::vector<TickRecord> runClosedLoop(const KnowledgeBase &kb, const EnvironmentState &initial, int steps,
                                      const DisturbanceProfile &disturbance, Policy policy,
                                      double threshold = kDefaultThreshold);

/// `tick,<plant variables in schema order>,decision_id,score`
std::string trajectoryCsvHeader(const PlantSchema &schema);
std::string trajectoryCsvRow(const TickRecord &record, const PlantSchema &schema);
std::string exportTrajectoryCsv(const std::vector<TickRecord> &trajectory, const PlantSchema &schema);

}  // namespace sitfuzz
