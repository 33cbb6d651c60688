#include "sitfuzz/inference.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace sitfuzz {

namespace {

void requireSameUniverse(const FuzzySet &a, const FuzzySet &b, const char *what) {
  if (!a.sameUniverse(b) || a.size() != b.size()) {
    const auto name = [](const FuzzySet &s) { return s.universe ? s.universe->id : std::string("<none>"); };
    throw UniverseMismatch(std::string(what) + ": '" + name(a) + "' vs '" + name(b) + "'");
  }
}

}  // namespace

double possibility(const FuzzySet &a, const FuzzySet &b) {
  requireSameUniverse(a, b, "possibility");
  double sup = 0.0;
  for (std::size_t i = 0; i < a.mu.size(); ++i) sup = std::max(sup, std::min(a.mu[i], b.mu[i]));
  return sup;
}

FuzzyRelation::FuzzyRelation(UniversePtr from_universe, UniversePtr to_universe,
                             std::vector<std::vector<double>> matrix)
    : from(std::move(from_universe)), to(std::move(to_universe)), rows(matrix.size()) {
  cols = rows ? matrix.front().size() : 0;
  mu.reserve(rows * cols);
  for (const auto &row : matrix) {
    if (row.size() != cols) throw DimensionMismatch("relation rows have different lengths");
    mu.insert(mu.end(), row.begin(), row.end());
  }
  if (from && rows != from->size()) throw DimensionMismatch("relation row count differs from source universe");
  if (to && cols != to->size()) throw DimensionMismatch("relation column count differs from target universe");
}

FuzzyRelation FuzzyRelation::identity(UniversePtr universe) {
  const auto n = universe->size();
  std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) m[i][i] = 1.0;
  return {universe, universe, std::move(m)};
}

FuzzySet composeRelation(const FuzzySet &input, const FuzzyRelation &relation) {
  if (input.size() != relation.rows) {
    throw DimensionMismatch("input has " + std::to_string(input.size()) + " points, relation has " +
                            std::to_string(relation.rows) + " rows");
  }
  if (input.universe && relation.from && !input.sameUniverse(FuzzySet(relation.from, {}))) {
    throw UniverseMismatch("input universe '" + input.universe->id + "' is not the relation's domain '" +
                           relation.from->id + "'");
  }
  FuzzySet out = FuzzySet::empty(relation.to);
  for (std::size_t x = 0; x < relation.rows; ++x) {
    for (std::size_t y = 0; y < relation.cols; ++y) {
      out.mu[y] = std::max(out.mu[y], std::min(input.mu[x], relation.at(x, y)));
    }
  }
  return out;
}

FuzzyRelation composeRelations(const FuzzyRelation &first, const FuzzyRelation &second) {
  if (first.cols != second.rows) throw DimensionMismatch("inner dimensions of the relations differ");
  std::vector<std::vector<double>> m(first.rows, std::vector<double>(second.cols, 0.0));
  for (std::size_t x = 0; x < first.rows; ++x) {
    for (std::size_t z = 0; z < second.cols; ++z) {
      for (std::size_t y = 0; y < first.cols; ++y) {
        m[x][z] = std::max(m[x][z], std::min(first.at(x, y), second.at(y, z)));
      }
    }
  }
  return {first.from, second.to, std::move(m)};
}

double ruleActivation(const Rule &rule, const PremiseVector &premises, const KnowledgeBase &kb,
                      std::vector<std::string> *defaulted) {
  double activation = 1.0;
  auto note_default = [&](const std::string &variable) {
    if (defaulted && std::find(defaulted->begin(), defaulted->end(), variable) == defaulted->end()) {
      defaulted->push_back(variable);
    }
  };
  for (const auto &conjunct : rule.antecedent) {
    const auto *term = kb.findTerm(conjunct.variable, conjunct.term);
    if (!term) throw UnknownVariable(conjunct.variable + "." + conjunct.term);
    auto it = premises.find(conjunct.variable);
    if (it == premises.end()) {
      note_default(conjunct.variable);
      continue;
    }
    activation = std::min(activation, possibility(it->second, term->set));
  }
  for (const auto &binding : rule.bindings) {
    if (!kb.findVariable(binding.variable)) throw UnknownVariable(binding.variable);
    auto it = premises.find(binding.variable);
    if (it == premises.end()) {
      note_default(binding.variable);
      continue;
    }
    activation = std::min(activation, possibility(binding.reference, it->second));
  }
  return activation;
}

InferenceResult infer(const PremiseVector &premises, std::span<const Rule> rules, const KnowledgeBase &kb) {
  for (const auto &[name, set] : premises) {
    const auto &variable = kb.variable(name);
    if (!set.universe || set.universe->id != variable.universe->id || set.size() != variable.universe->size()) {
      throw UniverseMismatch("premise '" + name + "' is not on the universe of its variable");
    }
  }

  InferenceResult result;
  std::set<RepresentationLevel> levels;
  for (const auto &rule : rules) {
    levels.insert(rule.level);
    std::vector<std::string> defaulted;
    const double activation = ruleActivation(rule, premises, kb, &defaulted);
    result.rule_activations[rule.id] = activation;
    if (!defaulted.empty()) result.defaulted[rule.id] = std::move(defaulted);

    const auto *consequent = kb.findTerm(rule.consequent.variable, rule.consequent.term);
    if (!consequent) throw UnknownVariable(rule.consequent.variable + "." + rule.consequent.term);
    auto [it, inserted] = result.output.try_emplace(rule.consequent.variable, FuzzySet::empty(consequent->set.universe));
    auto &out = it->second.mu;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(out[i], std::min(activation, consequent->set.mu[i]));
  }
  if (levels.size() == 1) result.level = *levels.begin();
  return result;
}

InferenceResult inferAtLevel(const PremiseVector &premises, const KnowledgeBase &kb, RepresentationLevel level) {
  std::vector<Rule> selected;
  std::copy_if(kb.rules.begin(), kb.rules.end(), std::back_inserter(selected),
               [level](const Rule &r) { return r.level == level; });
  auto result = infer(premises, selected, kb);
  result.level = level;
  return result;
}

InferenceResult inferAllLevels(const PremiseVector &premises, const KnowledgeBase &kb) {
  InferenceResult merged;
  for (auto level : {RepresentationLevel::RxCodes, RepresentationLevel::UniversalSemanticCode,
                     RepresentationLevel::SemanticFrames}) {
    auto part = inferAtLevel(premises, kb, level);
    for (auto &[rule, activation] : part.rule_activations) merged.rule_activations[rule] = activation;
    for (auto &[rule, vars] : part.defaulted) merged.defaulted[rule] = std::move(vars);
    for (auto &[name, set] : part.output) {
      auto [it, inserted] = merged.output.try_emplace(name, set);
      if (!inserted) it->second = unionOf(it->second, set);
    }
  }
  return merged;
}

Fuzzification fuzzify(double value, const LinguisticVariable &variable) {
  const auto &points = variable.universe->points;
  if (!(value >= points.front() && value <= points.back())) {
    throw RangeError("value " + std::to_string(value) + " outside the universe of '" + variable.name + "'");
  }
  // First point not below the value; step back when the lower neighbour is
  // at least as close.
  auto it = std::lower_bound(points.begin(), points.end(), value);
  std::size_t index = static_cast<std::size_t>(it - points.begin());
  if (index > 0 && (index == points.size() || value - points[index - 1] <= points[index] - value)) --index;

  Fuzzification out{FuzzySet::singleton(variable.universe, index), index, {}};
  for (const auto &t : variable.terms) out.degrees.emplace_back(t.label, t.set.mu[index]);
  return out;
}

Defuzzified defuzzify(const FuzzySet &set, DefuzzMethod method) {
  const auto &points = set.universe->points;
  const double midpoint = (points.front() + points.back()) / 2.0;
  if (method == DefuzzMethod::Centroid) {
    double weighted = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < set.mu.size(); ++i) {
      weighted += points[i] * set.mu[i];
      total += set.mu[i];
    }
    if (total == 0.0) return {midpoint, true};
    return {weighted / total, false};
  }
  const double height = set.height();
  if (height == 0.0) return {midpoint, true};
  std::optional<double> first;
  double last = 0.0;
  for (std::size_t i = 0; i < set.mu.size(); ++i) {
    if (set.mu[i] == height) {
      if (!first) first = points[i];
      last = points[i];
    }
  }
  return {(*first + last) / 2.0, false};
}

}  // namespace sitfuzz
