#include "sitfuzz/plant.hpp"

#include <algorithm>
#include <mutex>

#include "sitfuzz/inference.hpp"

namespace sitfuzz {

EnvironmentState PlantModel::initialState() const {
  EnvironmentState state;
  for (const auto &v : schema_.variables) state.variables[v.name] = v.initial;
  return state;
}

double PlantModel::clamp(const std::string &variable, double value) const {
  const auto *v = schema_.find(variable);
  return v ? std::clamp(value, v->min, v->max) : value;
}

void PlantModel::requireKnown(const std::string &variable) const {
  if (!schema_.find(variable)) throw SchemaError("unknown plant variable '" + variable + "'");
}

InventoryPlant::InventoryPlant(PlantSchema schema) : PlantModel(std::move(schema)) {
  requireKnown("stock");
  requireKnown("demand_actual");
}

EnvironmentState InventoryPlant::step(const EnvironmentState &state, std::span<const ImpactRule> impacts,
                                      const Disturbance &disturbance) const {
  EnvironmentState next = state;
  next.tick = state.tick + 1;

  double ordered = 0.0;
  for (const auto &impact : impacts) {
    requireKnown(impact.target_variable);
    if (impact.target_variable == "order") {
      ordered = impact.mode == ImpactMode::Delta ? ordered + impact.value : impact.value;
      continue;
    }
    auto &value = next.variables[impact.target_variable];
    value = clamp(impact.target_variable, impact.mode == ImpactMode::Delta ? value + impact.value : impact.value);
  }
  if (schema().find("order")) next.variables["order"] = clamp("order", ordered);

  double extra_consumption = 0.0;
  for (const auto &[name, w] : disturbance) {
    requireKnown(name);
    if (name == "stock") {
      extra_consumption += w;
    } else {
      next.variables[name] = clamp(name, next.variables[name] + w);
    }
  }

  const double balance = state.variables.at("stock") + ordered - next.variables.at("demand_actual") - extra_consumption;
  next.variables["stock"] = clamp("stock", balance);
  return next;
}

namespace {

std::mutex &registryMutex() {
  static std::mutex m;
  return m;
}

std::map<std::string, PlantFactory> &registry() {
  static std::map<std::string, PlantFactory> r{
      {"inventory", [](const PlantSchema &s) { return std::make_unique<InventoryPlant>(s); }}};
  return r;
}

}  // namespace

void registerPlantModel(const std::string &name, PlantFactory factory) {
  std::lock_guard lock(registryMutex());
  registry()[name] = std::move(factory);
}

std::unique_ptr<PlantModel> makePlant(const PlantSchema &schema) {
  PlantFactory factory;
  {
    std::lock_guard lock(registryMutex());
    auto it = registry().find(schema.model);
    if (it == registry().end()) throw SchemaError("unknown plant model '" + schema.model + "'");
    factory = it->second;
  }
  return factory(schema);
}

EnvironmentState stepPlant(const PlantSchema &schema, const EnvironmentState &state,
                           std::span<const ImpactRule> impacts, const Disturbance &disturbance) {
  return makePlant(schema)->step(state, impacts, disturbance);
}

Situation observe(const EnvironmentState &state, const KnowledgeBase &kb) {
  Situation situation;
  situation.id = "observed@" + std::to_string(state.tick);
  for (const auto &pv : kb.plant.variables) {
    if (!pv.observe_as) continue;
    auto it = state.variables.find(pv.name);
    if (it == state.variables.end()) continue;
    situation.assignments.emplace(*pv.observe_as, fuzzify(it->second, kb.variable(*pv.observe_as)).singleton);
  }
  return situation;
}

FullSituation observeFull(const EnvironmentState &state, const KnowledgeBase &kb) {
  return {observe(state, kb), state, state.tick};
}

DisturbanceSource::DisturbanceSource(DisturbanceProfile profile)
    : profile_(std::move(profile)), engine_(profile_.seeded ? profile_.seeded->seed : 0) {}

Disturbance DisturbanceSource::next() {
  Disturbance out;
  for (const auto &[name, values] : profile_.sequences) {
    out[name] = tick_ < values.size() ? values[tick_] : 0.0;
  }
  if (profile_.seeded) {
    for (const auto &[name, bounds] : profile_.seeded->bounds) {
      // 53 high bits -> [0,1); independent of the standard library's
      // distribution implementations.
      const double unit = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
      out[name] += bounds.first + (bounds.second - bounds.first) * unit;
    }
  }
  ++tick_;
  return out;
}

}  // namespace sitfuzz
