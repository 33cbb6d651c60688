#pragma once

#include <array>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "sitfuzz/inference.hpp"
#include "sitfuzz/kb.hpp"
#include "sitfuzz/reasoning.hpp"

namespace testsupport {

std::string dataPath(const std::string &name);
std::string goldenPath(const std::string &name);
std::string readFile(const std::string &path);

const sitfuzz::KnowledgeBase &demoKb();
const sitfuzz::KnowledgeBase &coarseKb();

/// Premise for `variable` equal to its term `label`.
sitfuzz::FuzzySet termSet(const sitfuzz::KnowledgeBase &kb, const std::string &variable, const std::string &label);
sitfuzz::FuzzySet pointsSet(const sitfuzz::KnowledgeBase &kb, const std::string &variable, std::vector<double> mu);

/// Situation whose every assignment is a term of the named variable.
sitfuzz::Situation situationOf(const sitfuzz::KnowledgeBase &kb,
                               const std::map<std::string, std::string> &terms, const std::string &id = "current");

// ---------------------------------------------------------------------------
// Random instances

using Rng = std::mt19937_64;

/// Membership drawn from a quarter grid so min/max results are exact.
double randomDegree(Rng &rng);
sitfuzz::UniversePtr randomUniverse(Rng &rng, const std::string &id, std::size_t max_points = 6);
sitfuzz::FuzzySet randomSet(Rng &rng, const sitfuzz::UniversePtr &universe);

/// A KB with 1..4 variables, 1..6 rules and 2..6 point universes; rules
/// may carry bindings.
sitfuzz::KnowledgeBase randomKb(Rng &rng);
/// Premises for a random subset of the KB variables.
sitfuzz::PremiseVector randomPremises(Rng &rng, const sitfuzz::KnowledgeBase &kb);

// ---------------------------------------------------------------------------
// Oracles. Written over raw vectors, independent of the library kernels.

namespace oracle {

double supMin(const std::vector<double> &a, const std::vector<double> &b);

/// Row-vector x matrix sup-min product.
std::vector<double> image(const std::vector<double> &input, const std::vector<std::vector<double>> &matrix);
std::vector<std::vector<double>> product(const std::vector<std::vector<double>> &a,
                                         const std::vector<std::vector<double>> &b);

/// Enumerates every rule and every output point: out_k(y) = max over rules
/// concluding on k of min(min over conjuncts and bindings, consequent(y)).
std::map<std::string, std::vector<double>> compositional(const sitfuzz::PremiseVector &premises,
                                                         const sitfuzz::KnowledgeBase &kb);

double combine(const std::vector<std::array<double, 4>> &bundles);

}  // namespace oracle

}  // namespace testsupport
