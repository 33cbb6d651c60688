#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sitfuzz/kb.hpp"

namespace sitfuzz {

/// Possibility of `a` given `b`: sup over the shared universe of
/// min(mu_a, mu_b). Symmetric. Throws UniverseMismatch.
double possibility(const FuzzySet &a, const FuzzySet &b);

/// Fuzzy relation over from x to, stored row-major (`from` rows).
struct FuzzyRelation {
  UniversePtr from;
  UniversePtr to;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> mu;

  FuzzyRelation() = default;
  FuzzyRelation(UniversePtr from_universe, UniversePtr to_universe, std::vector<std::vector<double>> matrix);

  double at(std::size_t row, std::size_t col) const { return mu[row * cols + col]; }
  static FuzzyRelation identity(UniversePtr universe);
};

/// Sup-min image of `input` through `relation`.
FuzzySet composeRelation(const FuzzySet &input, const FuzzyRelation &relation);

/// Sup-min product of two relations (first then second).
FuzzyRelation composeRelations(const FuzzyRelation &first, const FuzzyRelation &second);

/// Observed input vector a'_m: one fuzzy set per variable.
using PremiseVector = std::map<std::string, FuzzySet>;

struct InferenceResult {
  std::map<std::string, FuzzySet> output;
  std::map<std::string, double> rule_activations;
  /// Per rule, the variables that were absent from the premises and so
  /// contributed conformity 1.
  std::map<std::string, std::vector<std::string>> defaulted;
  std::optional<RepresentationLevel> level;  // unset when several levels were aggregated
};

/// Rule activation under the max-min compositional rule with possibility
/// conformities: min over antecedent conjuncts of Poss(premise, term), min
/// over bindings of Poss(reference, premise). Absent premises count as 1.
double ruleActivation(const Rule &rule, const PremiseVector &premises, const KnowledgeBase &kb,
                      std::vector<std::string> *defaulted = nullptr);

/// Applies `rules` to `premises`: each consequent variable receives the
/// pointwise max over rules of min(activation, consequent term).
/// Throws UnknownVariable or UniverseMismatch.
InferenceResult infer(const PremiseVector &premises, std::span<const Rule> rules, const KnowledgeBase &kb);

/// Runs the KB rules tagged `level`.
InferenceResult inferAtLevel(const PremiseVector &premises, const KnowledgeBase &kb, RepresentationLevel level);

/// Runs every level and aggregates outputs by pointwise maximum.
InferenceResult inferAllLevels(const PremiseVector &premises, const KnowledgeBase &kb);

struct Fuzzification {
  FuzzySet singleton;
  std::size_t index = 0;
  std::vector<std::pair<std::string, double>> degrees;  // term label -> membership, in term order
};

/// Crisp reading to the nearest grid point of the variable's universe (ties
/// go to the lower point). Throws RangeError outside the universe.
Fuzzification fuzzify(double value, const LinguisticVariable &variable);

enum class DefuzzMethod { Centroid, MaxOfMaxima };

struct Defuzzified {
  double value = 0.0;
  bool degenerate = false;  // all-zero set; value is the universe midpoint
};

Defuzzified defuzzify(const FuzzySet &set, DefuzzMethod method = DefuzzMethod::Centroid);

}  // namespace sitfuzz
