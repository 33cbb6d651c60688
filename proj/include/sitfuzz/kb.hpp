#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "sitfuzz/errors.hpp"

namespace sitfuzz {

/// Ordered discrete domain of a linguistic variable. Points are strictly
/// increasing and carry the variable's physical unit.
struct Universe {
  std::string id;
  std::vector<double> points;
  std::string unit_label;

  std::size_t size() const { return points.size(); }
  double front() const { return points.front(); }
  double back() const { return points.back(); }
  bool operator==(const Universe &) const = default;
};

using UniversePtr = std::shared_ptr<const Universe>;

/// Membership function sampled on a universe. Memberships are aligned with
/// the universe points; heights below 1 are allowed.
struct FuzzySet {
  UniversePtr universe;
  std::vector<double> mu;

  FuzzySet() = default;
  FuzzySet(UniversePtr u, std::vector<double> m) : universe(std::move(u)), mu(std::move(m)) {}

  /// All-zero set on `u`.
  static FuzzySet empty(UniversePtr u);
  /// Membership 1 at point index `index`, zero elsewhere.
  static FuzzySet singleton(UniversePtr u, std::size_t index);

  std::size_t size() const { return mu.size(); }
  double height() const;
  bool sameUniverse(const FuzzySet &other) const;

  friend bool operator==(const FuzzySet &a, const FuzzySet &b);
};

/// Points of `set` whose membership is at least `alpha`, in universe order.
/// Throws DomainError unless alpha is in (0, 1].
std::vector<double> alphaCut(const FuzzySet &set, double alpha);

/// Pointwise maximum (fuzzy union). Throws UniverseMismatch.
FuzzySet unionOf(const FuzzySet &a, const FuzzySet &b);

enum class RepresentationLevel { RxCodes, UniversalSemanticCode, SemanticFrames };

std::string_view toString(RepresentationLevel level);
RepresentationLevel levelFromString(std::string_view text);

struct Term {
  std::string label;
  FuzzySet set;
  bool operator==(const Term &) const = default;
};

/// Linguistic variable with its term sets. Facets are opaque annotations
/// (morphological, behavioural, ...) carried through load and serialize.
struct LinguisticVariable {
  std::string name;
  UniversePtr universe;
  std::vector<Term> terms;
  std::map<std::string, std::string> facets;

  const Term *findTerm(std::string_view label) const;
  friend bool operator==(const LinguisticVariable &a, const LinguisticVariable &b);
};

struct Proposition {
  std::string variable;
  std::string term;
  bool operator==(const Proposition &) const = default;
};

/// Stored reference value a rule requires the live premise to conform to.
struct Binding {
  std::string variable;
  std::optional<std::string> term;  // set when authored by term label
  FuzzySet reference;
  bool operator==(const Binding &) const = default;
};

struct Rule {
  std::string id;
  RepresentationLevel level = RepresentationLevel::SemanticFrames;
  std::vector<Proposition> antecedent;
  Proposition consequent;
  std::vector<Binding> bindings;
  bool operator==(const Rule &) const = default;
};

/// Fuzzy assignment over a set of variables.
struct Situation {
  std::string id;
  std::map<std::string, FuzzySet> assignments;
  RepresentationLevel level = RepresentationLevel::SemanticFrames;
  std::string annotation;
  bool operator==(const Situation &) const = default;
};

enum class ImpactMode { Delta, Set };

struct ImpactRule {
  std::string target_variable;
  ImpactMode mode = ImpactMode::Delta;
  double value = 0.0;
  std::string description;

  /// Impacts are grouped by effect; the description does not take part.
  bool sameEffect(const ImpactRule &other) const {
    return target_variable == other.target_variable && mode == other.mode && value == other.value;
  }
  bool operator==(const ImpactRule &) const = default;
};

using CrispVector = std::map<std::string, double>;

/// Transition S : trigger => target : impacts, annotated with the observed
/// input (x), control (u) and disturbance (w) vectors.
struct ElementaryAct {
  std::string id;
  Situation trigger;
  Situation target;
  std::vector<ImpactRule> impacts;
  CrispVector inputs;
  CrispVector controls;
  CrispVector disturbances;
  bool operator==(const ElementaryAct &) const = default;
};

/// Crisp plant state at a tick.
struct EnvironmentState {
  std::map<std::string, double> variables;
  long tick = 0;
  bool operator==(const EnvironmentState &) const = default;
};

struct FullSituation {
  Situation situation;
  EnvironmentState environment;
  long timestamp = 0;
};

struct Sense {
  std::string concept_id;
  std::string domain;
  bool operator==(const Sense &) const = default;
};

struct DictionaryEntry {
  std::string surface_form;
  std::string language;
  std::string concept_id;
  std::map<std::string, std::string> grammar;
  std::vector<Sense> senses;

  bool isKeyword() const;
  bool operator==(const DictionaryEntry &) const = default;
};

struct Dictionary {
  std::vector<std::string> languages;
  std::string default_domain;
  std::vector<DictionaryEntry> entries;

  bool supports(std::string_view language) const;
  bool operator==(const Dictionary &) const = default;
};

struct PlantVariable {
  std::string name;
  double min = 0.0;
  double max = 0.0;
  double initial = 0.0;
  std::optional<std::string> observe_as;  // KB variable the reading is fuzzified into
  bool operator==(const PlantVariable &) const = default;
};

struct Setpoint {
  std::string variable;
  double low = 0.0;
  double high = 0.0;
  bool operator==(const Setpoint &) const = default;
};

struct PlantSchema {
  std::string model = "inventory";
  std::vector<PlantVariable> variables;
  std::optional<Setpoint> setpoint;

  const PlantVariable *find(std::string_view name) const;
  bool operator==(const PlantSchema &) const = default;
};

/// Verbal <-> numeric estimate map of a variable: ordered labels and the
/// grid membership behind each.
struct EstimateMap {
  std::vector<std::string> verbal_labels;
  std::map<std::string, FuzzySet> numeric_grid;

  static EstimateMap of(const LinguisticVariable &variable);
  const FuzzySet &numeric(const std::string &label) const;
  /// Label whose term best conforms to `set` (possibility, ties to the
  /// earlier label).
  std::string verbal(const FuzzySet &set) const;
};

/// The loaded knowledge base. Immutable once built; sessions hold it through
/// `std::shared_ptr<const KnowledgeBase>`.
struct KnowledgeBase {
  std::string version;
  std::vector<UniversePtr> universes;
  std::vector<LinguisticVariable> variables;
  std::vector<Rule> rules;
  std::vector<Situation> situations;
  std::vector<ElementaryAct> acts;
  Dictionary dictionary;
  PlantSchema plant;

  UniversePtr findUniverse(std::string_view id) const;
  const LinguisticVariable *findVariable(std::string_view name) const;
  const Term *findTerm(std::string_view variable, std::string_view label) const;
  const Rule *findRule(std::string_view id) const;
  const Situation *findSituation(std::string_view id) const;
  const ElementaryAct *findAct(std::string_view id) const;

  const LinguisticVariable &variable(std::string_view name) const;  // throws UnknownVariable

  friend bool operator==(const KnowledgeBase &a, const KnowledgeBase &b);
};

using KnowledgeBasePtr = std::shared_ptr<const KnowledgeBase>;

struct ValidationIssue {
  enum class Severity { Error, Warning };
  Severity severity = Severity::Error;
  std::string location;  // e.g. "variables[demand].terms[high]"
  std::string message;
  std::string offending_id;  // set for dangling references
  bool dangling = false;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;

  std::vector<ValidationIssue> errors() const;
  std::vector<ValidationIssue> warnings() const;
  /// True when no error-severity entry exists.
  bool ok() const;
  std::string summary() const;
};

ValidationReport validateKnowledgeBase(const KnowledgeBase &kb);

/// Structural decode of a KB document. Membership shapes are sampled onto
/// their universes. Throws SchemaError for malformed documents and
/// IntegrityError for references that cannot be resolved while decoding.
KnowledgeBase parseKnowledgeBase(const nlohmann::json &document);

/// Decode and validate. Dangling references raise IntegrityError naming the
/// id; any other error-severity issue raises SchemaError.
KnowledgeBase loadKnowledgeBase(const nlohmann::json &document);
KnowledgeBase loadKnowledgeBase(std::string_view text);
KnowledgeBase loadKnowledgeBaseFile(const std::string &path);

nlohmann::json serializeKnowledgeBase(const KnowledgeBase &kb);

/// Sampled membership of the triangle (a, b, c) at x. a == b or b == c give
/// shoulders.
double triangle(double x, double a, double b, double c);
double trapezoid(double x, double a, double b, double c, double d);

}  // namespace sitfuzz
