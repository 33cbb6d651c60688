#include "sitfuzz/kb.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "sitfuzz/inference.hpp"

namespace sitfuzz {

LexicalGap::LexicalGap(std::vector<std::string> words)
    : Error("LexicalGap",
            [&] {
              std::string detail = "unknown words:";
              for (const auto &w : words) detail += " " + w;
              return detail;
            }()),
      words_(std::move(words)) {}

Ambiguous::Ambiguous(std::string surface, std::vector<std::string> senses)
    : Error("Ambiguous",
            [&] {
              std::string detail = "'" + surface + "' is ambiguous:";
              for (const auto &s : senses) detail += " " + s;
              return detail;
            }()),
      surface_(std::move(surface)),
      senses_(std::move(senses)) {}

// ---------------------------------------------------------------------------
// FuzzySet

FuzzySet FuzzySet::empty(UniversePtr u) {
  const auto n = u->size();
  return {std::move(u), std::vector<double>(n, 0.0)};
}

FuzzySet FuzzySet::singleton(UniversePtr u, std::size_t index) {
  auto set = empty(std::move(u));
  set.mu.at(index) = 1.0;
  return set;
}

double FuzzySet::height() const {
  double h = 0.0;
  for (double m : mu) h = std::max(h, m);
  return h;
}

bool FuzzySet::sameUniverse(const FuzzySet &other) const {
  if (!universe || !other.universe) return false;
  if (universe == other.universe) return true;
  return universe->id == other.universe->id && universe->points == other.universe->points;
}

bool operator==(const FuzzySet &a, const FuzzySet &b) {
  if (static_cast<bool>(a.universe) != static_cast<bool>(b.universe)) return false;
  if (a.universe && !a.sameUniverse(b)) return false;
  return a.mu == b.mu;
}

std::vector<double> alphaCut(const FuzzySet &set, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw DomainError("alpha " + std::to_string(alpha) + " outside (0,1]");
  }
  std::vector<double> cut;
  for (std::size_t i = 0; i < set.mu.size(); ++i) {
    if (set.mu[i] >= alpha) cut.push_back(set.universe->points[i]);
  }
  return cut;
}

FuzzySet unionOf(const FuzzySet &a, const FuzzySet &b) {
  if (!a.sameUniverse(b) || a.size() != b.size()) {
    throw UniverseMismatch("union over different universes");
  }
  FuzzySet out = a;
  for (std::size_t i = 0; i < out.mu.size(); ++i) out.mu[i] = std::max(a.mu[i], b.mu[i]);
  return out;
}

std::string_view toString(RepresentationLevel level) {
  switch (level) {
    case RepresentationLevel::RxCodes:
      return "RX_CODES";
    case RepresentationLevel::UniversalSemanticCode:
      return "USC";
    case RepresentationLevel::SemanticFrames:
      return "SEMANTIC_FRAMES";
  }
  return "SEMANTIC_FRAMES";
}

RepresentationLevel levelFromString(std::string_view text) {
  if (text == "RX_CODES") return RepresentationLevel::RxCodes;
  if (text == "USC") return RepresentationLevel::UniversalSemanticCode;
  if (text == "SEMANTIC_FRAMES") return RepresentationLevel::SemanticFrames;
  throw SchemaError("unknown representation level '" + std::string(text) + "'");
}

double triangle(double x, double a, double b, double c) {
  if (x == b) return 1.0;
  if (x < a || x > c) return 0.0;
  if (x < b) return (x - a) / (b - a);
  return (c - x) / (c - b);
}

double trapezoid(double x, double a, double b, double c, double d) {
  if (x >= b && x <= c) return 1.0;
  if (x < a || x > d) return 0.0;
  if (x < b) return (x - a) / (b - a);
  return (d - x) / (d - c);
}

// ---------------------------------------------------------------------------
// Lookups

const Term *LinguisticVariable::findTerm(std::string_view label) const {
  for (const auto &t : terms) {
    if (t.label == label) return &t;
  }
  return nullptr;
}

bool operator==(const LinguisticVariable &a, const LinguisticVariable &b) {
  if (a.name != b.name || a.terms != b.terms || a.facets != b.facets) return false;
  if (static_cast<bool>(a.universe) != static_cast<bool>(b.universe)) return false;
  return !a.universe || *a.universe == *b.universe;
}

bool DictionaryEntry::isKeyword() const {
  auto it = grammar.find("pos");
  return it != grammar.end() && it->second == "keyword";
}

bool Dictionary::supports(std::string_view language) const {
  return std::find(languages.begin(), languages.end(), language) != languages.end();
}

const PlantVariable *PlantSchema::find(std::string_view name) const {
  for (const auto &v : variables) {
    if (v.name == name) return &v;
  }
  return nullptr;
}

EstimateMap EstimateMap::of(const LinguisticVariable &variable) {
  EstimateMap map;
  for (const auto &t : variable.terms) {
    map.verbal_labels.push_back(t.label);
    map.numeric_grid.emplace(t.label, t.set);
  }
  return map;
}

const FuzzySet &EstimateMap::numeric(const std::string &label) const {
  auto it = numeric_grid.find(label);
  if (it == numeric_grid.end()) throw UnknownVariable("no estimate labelled '" + label + "'");
  return it->second;
}

std::string EstimateMap::verbal(const FuzzySet &set) const {
  std::string best;
  double best_degree = -1.0;
  for (const auto &label : verbal_labels) {
    const double d = possibility(set, numeric_grid.at(label));
    if (d > best_degree) {
      best_degree = d;
      best = label;
    }
  }
  return best;
}

template <typename T>
static const T *findById(const std::vector<T> &items, std::string_view id) {
  for (const auto &item : items) {
    if (item.id == id) return &item;
  }
  return nullptr;
}

UniversePtr KnowledgeBase::findUniverse(std::string_view id) const {
  for (const auto &u : universes) {
    if (u->id == id) return u;
  }
  return nullptr;
}

const LinguisticVariable *KnowledgeBase::findVariable(std::string_view name) const {
  for (const auto &v : variables) {
    if (v.name == name) return &v;
  }
  return nullptr;
}

const Term *KnowledgeBase::findTerm(std::string_view variable, std::string_view label) const {
  const auto *v = findVariable(variable);
  return v ? v->findTerm(label) : nullptr;
}

const Rule *KnowledgeBase::findRule(std::string_view id) const { return findById(rules, id); }
const Situation *KnowledgeBase::findSituation(std::string_view id) const { return findById(situations, id); }
const ElementaryAct *KnowledgeBase::findAct(std::string_view id) const { return findById(acts, id); }

const LinguisticVariable &KnowledgeBase::variable(std::string_view name) const {
  const auto *v = findVariable(name);
  if (!v) throw UnknownVariable(std::string(name));
  return *v;
}

bool operator==(const KnowledgeBase &a, const KnowledgeBase &b) {
  if (a.universes.size() != b.universes.size()) return false;
  for (std::size_t i = 0; i < a.universes.size(); ++i) {
    if (!(*a.universes[i] == *b.universes[i])) return false;
  }
  return a.version == b.version && a.variables == b.variables && a.rules == b.rules &&
         a.situations == b.situations && a.acts == b.acts && a.dictionary == b.dictionary && a.plant == b.plant;
}

// ---------------------------------------------------------------------------
// Validation

std::vector<ValidationIssue> ValidationReport::errors() const {
  std::vector<ValidationIssue> out;
  std::copy_if(issues.begin(), issues.end(), std::back_inserter(out),
               [](const auto &i) { return i.severity == ValidationIssue::Severity::Error; });
  return out;
}

std::vector<ValidationIssue> ValidationReport::warnings() const {
  std::vector<ValidationIssue> out;
  std::copy_if(issues.begin(), issues.end(), std::back_inserter(out),
               [](const auto &i) { return i.severity == ValidationIssue::Severity::Warning; });
  return out;
}

bool ValidationReport::ok() const {
  return std::none_of(issues.begin(), issues.end(),
                      [](const auto &i) { return i.severity == ValidationIssue::Severity::Error; });
}

std::string ValidationReport::summary() const {
  std::ostringstream out;
  for (const auto &i : issues) {
    out << (i.severity == ValidationIssue::Severity::Error ? "error" : "warning") << ": " << i.location << ": "
        << i.message << "\n";
  }
  return out.str();
}

namespace {

class Validator {
 public:
  explicit Validator(const KnowledgeBase &kb) : kb_(kb) {}

  ValidationReport run() {
    checkUniverses();
    checkVariables();
    checkRules();
    checkSituations();
    checkActs();
    checkDictionary();
    checkPlant();
    return std::move(report_);
  }

 private:
  void error(std::string location, std::string message) {
    report_.issues.push_back({ValidationIssue::Severity::Error, std::move(location), std::move(message), {}, false});
  }
  void warning(std::string location, std::string message) {
    report_.issues.push_back(
        {ValidationIssue::Severity::Warning, std::move(location), std::move(message), {}, false});
  }
  void dangling(std::string location, const std::string &id, const std::string &what) {
    report_.issues.push_back({ValidationIssue::Severity::Error, std::move(location),
                              "unknown " + what + " '" + id + "'", id, true});
  }

  void checkDuplicate(std::set<std::string> &seen, const std::string &id, const std::string &location,
                      const std::string &what) {
    if (id.empty()) error(location, what + " id is empty");
    if (!seen.insert(id).second) error(location, "duplicate " + what + " id '" + id + "'");
  }

  void checkSet(const FuzzySet &set, const std::string &location, const UniversePtr &expected) {
    if (!set.universe) {
      error(location, "fuzzy set has no universe");
      return;
    }
    if (expected && !(set.universe->id == expected->id)) {
      error(location, "universe '" + set.universe->id + "' differs from variable universe '" + expected->id + "'");
    }
    if (set.mu.size() != set.universe->size()) {
      error(location, "membership length " + std::to_string(set.mu.size()) + " differs from universe length " +
                          std::to_string(set.universe->size()));
    }
    bool out_of_range = false;
    for (double m : set.mu) out_of_range |= !(m >= 0.0 && m <= 1.0);
    if (out_of_range) error(location, "membership out of [0,1]");
    if (!out_of_range && !set.mu.empty() && set.height() < 1.0) warning(location, "fuzzy set is not normalized");
  }

  void checkUniverses() {
    std::set<std::string> seen;
    for (const auto &u : kb_.universes) {
      const auto loc = "universes[" + u->id + "]";
      checkDuplicate(seen, u->id, loc, "universe");
      if (u->points.empty()) error(loc, "universe has no points");
      for (std::size_t i = 1; i < u->points.size(); ++i) {
        if (!(u->points[i] > u->points[i - 1])) {
          error(loc, "points not strictly increasing");
          break;
        }
      }
    }
  }

  void checkVariables() {
    std::set<std::string> seen;
    for (const auto &v : kb_.variables) {
      const auto loc = "variables[" + v.name + "]";
      checkDuplicate(seen, v.name, loc, "variable");
      if (!v.universe) {
        error(loc, "variable has no universe");
        continue;
      }
      if (!kb_.findUniverse(v.universe->id)) dangling(loc, v.universe->id, "universe");
      if (v.terms.empty()) error(loc, "variable has no terms");
      std::set<std::string> labels;
      for (const auto &t : v.terms) {
        const auto tloc = loc + ".terms[" + t.label + "]";
        if (!labels.insert(t.label).second) error(tloc, "duplicate term label '" + t.label + "'");
        checkSet(t.set, tloc, v.universe);
      }
    }
  }

  void checkProposition(const Proposition &p, const std::string &loc) {
    const auto *v = kb_.findVariable(p.variable);
    if (!v) {
      dangling(loc, p.variable, "variable");
    } else if (!v->findTerm(p.term)) {
      dangling(loc, p.term, "term of '" + p.variable + "'");
    }
  }

  void checkAssignments(const Situation &s, const std::string &loc) {
    if (s.assignments.empty()) error(loc, "situation has no assignments");
    for (const auto &[name, set] : s.assignments) {
      const auto *v = kb_.findVariable(name);
      if (!v) {
        dangling(loc, name, "variable");
        continue;
      }
      checkSet(set, loc + ".assignments[" + name + "]", v->universe);
    }
  }

  void checkRules() {
    std::set<std::string> seen;
    for (const auto &r : kb_.rules) {
      const auto loc = "rules[" + r.id + "]";
      checkDuplicate(seen, r.id, loc, "rule");
      if (r.antecedent.empty()) error(loc, "rule antecedent is empty");
      for (const auto &p : r.antecedent) checkProposition(p, loc + ".antecedent");
      checkProposition(r.consequent, loc + ".consequent");
      for (const auto &b : r.bindings) {
        const auto *v = kb_.findVariable(b.variable);
        if (!v) {
          dangling(loc + ".bindings", b.variable, "variable");
          continue;
        }
        checkSet(b.reference, loc + ".bindings[" + b.variable + "]", v->universe);
      }
    }
  }

  void checkSituations() {
    std::set<std::string> seen;
    for (const auto &s : kb_.situations) {
      const auto loc = "situations[" + s.id + "]";
      checkDuplicate(seen, s.id, loc, "situation");
      checkAssignments(s, loc);
    }
  }

  void checkActs() {
    std::set<std::string> seen;
    for (const auto &a : kb_.acts) {
      const auto loc = "acts[" + a.id + "]";
      checkDuplicate(seen, a.id, loc, "act");
      checkAssignments(a.trigger, loc + ".trigger");
      checkAssignments(a.target, loc + ".target");
      for (const auto &i : a.impacts) {
        if (!kb_.plant.find(i.target_variable)) dangling(loc + ".impacts", i.target_variable, "plant variable");
      }
    }
  }

  void checkDictionary() {
    const auto &d = kb_.dictionary;
    for (std::size_t i = 0; i < d.entries.size(); ++i) {
      const auto &e = d.entries[i];
      const auto loc = "dictionary[" + std::to_string(i) + ":" + e.surface_form + "]";
      if (e.surface_form.empty()) error(loc, "empty surface form");
      if (e.senses.empty()) error(loc, "entry has no senses");
      if (!d.supports(e.language)) error(loc, "language '" + e.language + "' not declared");
    }
  }

  void checkPlant() {
    std::set<std::string> seen;
    for (const auto &v : kb_.plant.variables) {
      const auto loc = "plant[" + v.name + "]";
      checkDuplicate(seen, v.name, loc, "plant variable");
      if (!(v.min <= v.max)) error(loc, "bounds inverted");
      if (v.initial < v.min || v.initial > v.max) error(loc, "initial value outside bounds");
      if (v.observe_as) {
        const auto *kv = kb_.findVariable(*v.observe_as);
        if (!kv) {
          dangling(loc, *v.observe_as, "variable");
        } else if (kv->universe && (v.min < kv->universe->front() || v.max > kv->universe->back())) {
          error(loc, "bounds exceed the universe of '" + *v.observe_as + "'");
        }
      }
    }
    if (kb_.plant.setpoint && !kb_.plant.find(kb_.plant.setpoint->variable)) {
      dangling("plant.setpoint", kb_.plant.setpoint->variable, "plant variable");
    }
  }

  const KnowledgeBase &kb_;
  ValidationReport report_;
};

}  // namespace

ValidationReport validateKnowledgeBase(const KnowledgeBase &kb) { return Validator(kb).run(); }

}  // namespace sitfuzz
