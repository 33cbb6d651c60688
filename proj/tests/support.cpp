#include "support.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>

#ifndef SITFUZZ_SOURCE_DIR
#error "SITFUZZ_SOURCE_DIR must be defined"
#endif

namespace testsupport {

using namespace sitfuzz;

std::string dataPath(const std::string &name) { return std::string(SITFUZZ_SOURCE_DIR) + "/data/" + name; }
std::string goldenPath(const std::string &name) { return std::string(SITFUZZ_SOURCE_DIR) + "/tests/golden/" + name; }

std::string readFile(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

const KnowledgeBase &demoKb() {
  static const KnowledgeBase kb = loadKnowledgeBaseFile(dataPath("inventory.kb.json"));
  return kb;
}

const KnowledgeBase &coarseKb() {
  static const KnowledgeBase kb = loadKnowledgeBaseFile(dataPath("coarse_plant.kb.json"));
  return kb;
}

FuzzySet termSet(const KnowledgeBase &kb, const std::string &variable, const std::string &label) {
  const auto *t = kb.findTerm(variable, label);
  if (!t) throw std::runtime_error("no term " + variable + "." + label);
  return t->set;
}

FuzzySet pointsSet(const KnowledgeBase &kb, const std::string &variable, std::vector<double> mu) {
  return {kb.variable(variable).universe, std::move(mu)};
}

Situation situationOf(const KnowledgeBase &kb, const std::map<std::string, std::string> &terms, const std::string &id) {
  Situation s;
  s.id = id;
  for (const auto &[variable, label] : terms) s.assignments.emplace(variable, termSet(kb, variable, label));
  return s;
}

double randomDegree(Rng &rng) { return static_cast<double>(std::uniform_int_distribution<int>(0, 4)(rng)) / 4.0; }

UniversePtr randomUniverse(Rng &rng, const std::string &id, std::size_t max_points) {
  auto u = std::make_shared<Universe>();
  u->id = id;
  const auto n = std::uniform_int_distribution<std::size_t>(2, max_points)(rng);
  double x = std::uniform_int_distribution<int>(-5, 5)(rng);
  for (std::size_t i = 0; i < n; ++i) {
    u->points.push_back(x);
    x += std::uniform_int_distribution<int>(1, 4)(rng);
  }
  return u;
}

FuzzySet randomSet(Rng &rng, const UniversePtr &universe) {
  std::vector<double> mu(universe->size());
  for (auto &m : mu) m = randomDegree(rng);
  return {universe, std::move(mu)};
}

KnowledgeBase randomKb(Rng &rng) {
  KnowledgeBase kb;
  kb.version = "random";
  const auto nvars = std::uniform_int_distribution<int>(1, 4)(rng);
  for (int v = 0; v < nvars; ++v) {
    auto u = randomUniverse(rng, "u" + std::to_string(v));
    kb.universes.push_back(u);
    LinguisticVariable var;
    var.name = "v" + std::to_string(v);
    var.universe = u;
    const auto nterms = std::uniform_int_distribution<int>(1, 3)(rng);
    for (int t = 0; t < nterms; ++t) var.terms.push_back({"t" + std::to_string(t), randomSet(rng, u)});
    kb.variables.push_back(std::move(var));
  }
  auto pick_var = [&] { return &kb.variables[std::uniform_int_distribution<std::size_t>(0, kb.variables.size() - 1)(rng)]; };
  auto pick_term = [&](const LinguisticVariable &v) {
    return v.terms[std::uniform_int_distribution<std::size_t>(0, v.terms.size() - 1)(rng)].label;
  };
  const auto nrules = std::uniform_int_distribution<int>(1, 6)(rng);
  for (int r = 0; r < nrules; ++r) {
    Rule rule;
    rule.id = "r" + std::to_string(r);
    rule.level = static_cast<RepresentationLevel>(std::uniform_int_distribution<int>(0, 2)(rng));
    const auto nconj = std::uniform_int_distribution<int>(1, nvars)(rng);
    for (int c = 0; c < nconj; ++c) {
      const auto *v = pick_var();
      rule.antecedent.push_back({v->name, pick_term(*v)});
    }
    const auto *out = pick_var();
    rule.consequent = {out->name, pick_term(*out)};
    if (std::uniform_int_distribution<int>(0, 3)(rng) == 0) {
      const auto *v = pick_var();
      rule.bindings.push_back({v->name, std::nullopt, randomSet(rng, v->universe)});
    }
    kb.rules.push_back(std::move(rule));
  }
  return kb;
}

PremiseVector randomPremises(Rng &rng, const KnowledgeBase &kb) {
  PremiseVector premises;
  for (const auto &v : kb.variables) {
    if (std::uniform_int_distribution<int>(0, 4)(rng) == 0) continue;  // absent premise
    premises.emplace(v.name, randomSet(rng, v.universe));
  }
  return premises;
}

namespace oracle {

double supMin(const std::vector<double> &a, const std::vector<double> &b) {
  double best = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) best = std::max(best, std::min(a[i], b[i]));
  return best;
}

std::vector<double> image(const std::vector<double> &input, const std::vector<std::vector<double>> &matrix) {
  const std::size_t cols = matrix.empty() ? 0 : matrix.front().size();
  std::vector<double> out(cols, 0.0);
  for (std::size_t j = 0; j < cols; ++j) {
    for (std::size_t i = 0; i < input.size(); ++i) out[j] = std::max(out[j], std::min(input[i], matrix[i][j]));
  }
  return out;
}

std::vector<std::vector<double>> product(const std::vector<std::vector<double>> &a,
                                         const std::vector<std::vector<double>> &b) {
  std::vector<std::vector<double>> out;
  for (const auto &row : a) out.push_back(image(row, b));
  return out;
}

std::map<std::string, std::vector<double>> compositional(const PremiseVector &premises, const KnowledgeBase &kb) {
  std::map<std::string, std::vector<double>> out;
  auto membership = [&](const std::string &variable, const std::string &label) {
    for (const auto &v : kb.variables) {
      if (v.name != variable) continue;
      for (const auto &t : v.terms) {
        if (t.label == label) return t.set.mu;
      }
    }
    throw std::runtime_error("oracle: no term");
  };
  for (const auto &rule : kb.rules) {
    double activation = 1.0;
    for (const auto &p : rule.antecedent) {
      auto it = premises.find(p.variable);
      if (it == premises.end()) continue;
      activation = std::min(activation, supMin(it->second.mu, membership(p.variable, p.term)));
    }
    for (const auto &b : rule.bindings) {
      auto it = premises.find(b.variable);
      if (it == premises.end()) continue;
      activation = std::min(activation, supMin(b.reference.mu, it->second.mu));
    }
    const auto consequent = membership(rule.consequent.variable, rule.consequent.term);
    auto &row = out[rule.consequent.variable];
    row.resize(consequent.size(), 0.0);
    for (std::size_t y = 0; y < consequent.size(); ++y) row[y] = std::max(row[y], std::min(activation, consequent[y]));
  }
  return out;
}

double combine(const std::vector<std::array<double, 4>> &bundles) {
  double best = 0.0;
  for (const auto &b : bundles) {
    double m = 1.0;
    for (double x : b) m = std::min(m, x);
    best = std::max(best, m);
  }
  return best;
}

}  // namespace oracle

}  // namespace testsupport
