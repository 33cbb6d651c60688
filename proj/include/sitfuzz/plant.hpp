#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "sitfuzz/kb.hpp"

namespace sitfuzz {

using Disturbance = std::map<std::string, double>;

/// Discrete-time dynamics of a controlled unit.
class PlantModel {
 public:
  explicit PlantModel(PlantSchema schema) : schema_(std::move(schema)) {}
  virtual ~PlantModel() = default;

  const PlantSchema &schema() const { return schema_; }

  /// Next state; tick incremented, every variable clamped to its bounds.
  /// Throws SchemaError for impacts or disturbances on unknown variables.
  virtual EnvironmentState step(const EnvironmentState &state, std::span<const ImpactRule> impacts,
                                const Disturbance &disturbance) const = 0;

  EnvironmentState initialState() const;

 protected:
  double clamp(const std::string &variable, double value) const;
  void requireKnown(const std::string &variable) const;

 private:
  PlantSchema schema_;
};

/// Single-stock inventory unit:
///   stock' = clamp(stock + sum(order impacts) - demand_actual - w_stock)
/// `order` records this tick's ordered quantity; impacts and disturbances on
/// any other variable are applied to it directly before the balance.
class InventoryPlant : public PlantModel {
 public:
  explicit InventoryPlant(PlantSchema schema);
  EnvironmentState step(const EnvironmentState &state, std::span<const ImpactRule> impacts,
                        const Disturbance &disturbance) const override;
};

using PlantFactory = std::function<std::unique_ptr<PlantModel>(const PlantSchema &)>;

/// Registers a dynamics model under `schema.model` names.
void registerPlantModel(const std::string &name, PlantFactory factory);

/// Throws SchemaError for an unknown model name.
std::unique_ptr<PlantModel> makePlant(const PlantSchema &schema);

EnvironmentState stepPlant(const PlantSchema &schema, const EnvironmentState &state,
                           std::span<const ImpactRule> impacts, const Disturbance &disturbance);

/// Fuzzifies every observed plant variable into its KB variable.
Situation observe(const EnvironmentState &state, const KnowledgeBase &kb);
FullSituation observeFull(const EnvironmentState &state, const KnowledgeBase &kb);

/// Disturbances per tick: explicit per-variable sequences (0 past their
/// end), plus optional seeded uniform draws within per-variable bounds.
struct DisturbanceProfile {
  struct Seeded {
    std::uint64_t seed = 0;
    std::map<std::string, std::pair<double, double>> bounds;
  };
  std::map<std::string, std::vector<double>> sequences;
  std::optional<Seeded> seeded;
};

class DisturbanceSource {
 public:
  explicit DisturbanceSource(DisturbanceProfile profile);
  Disturbance next();

 private:
  DisturbanceProfile profile_;
  std::size_t tick_ = 0;
  std::mt19937_64 engine_;
};

}  // namespace sitfuzz
