#include <fstream>
#include <sstream>

#include "sitfuzz/kb.hpp"

namespace sitfuzz {

using nlohmann::json;

namespace {

const json &require(const json &object, const char *key, const std::string &where) {
  if (!object.is_object() || !object.contains(key)) {
    throw SchemaError(where + ": missing key '" + key + "'");
  }
  return object.at(key);
}

std::string requireString(const json &object, const char *key, const std::string &where) {
  const auto &v = require(object, key, where);
  if (!v.is_string()) throw SchemaError(where + ": '" + key + "' must be a string");
  return v.get<std::string>();
}

const json &requireArray(const json &object, const char *key, const std::string &where) {
  const auto &v = require(object, key, where);
  if (!v.is_array()) throw SchemaError(where + ": '" + key + "' must be an array");
  return v;
}

double number(const json &v, const std::string &where) {
  if (!v.is_number()) throw SchemaError(where + ": expected a number");
  return v.get<double>();
}

std::vector<double> numbers(const json &v, const std::string &where) {
  if (!v.is_array()) throw SchemaError(where + ": expected an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto &x : v) out.push_back(number(x, where));
  return out;
}

CrispVector crispVector(const json &object, const char *key, const std::string &where) {
  CrispVector out;
  if (!object.contains(key)) return out;
  const auto &v = object.at(key);
  if (!v.is_object()) throw SchemaError(where + ": '" + key + "' must be an object");
  for (const auto &[name, value] : v.items()) out[name] = number(value, where + "." + key);
  return out;
}

/// Samples an authored membership function onto `universe`. `variable` is
/// used to resolve `{"term": label}` references and may be null.
FuzzySet membership(const json &spec, const UniversePtr &universe, const LinguisticVariable *variable,
                    const std::string &where) {
  if (!spec.is_object()) throw SchemaError(where + ": membership must be an object");
  if (spec.contains("term")) {
    const auto label = requireString(spec, "term", where);
    if (!variable) throw SchemaError(where + ": term reference without a variable");
    const auto *term = variable->findTerm(label);
    if (!term) throw IntegrityError(label, where + ": unknown term '" + label + "' of '" + variable->name + "'");
    return term->set;
  }
  const auto shape = requireString(spec, "shape", where);
  if (shape == "points") {
    return {universe, numbers(require(spec, "mu", where), where + ".mu")};
  }
  const auto params = numbers(require(spec, "params", where), where + ".params");
  std::vector<double> mu;
  mu.reserve(universe->size());
  if (shape == "tri") {
    if (params.size() != 3 || !(params[0] <= params[1] && params[1] <= params[2])) {
      throw SchemaError(where + ": tri needs ordered params [a,b,c]");
    }
    for (double x : universe->points) mu.push_back(triangle(x, params[0], params[1], params[2]));
  } else if (shape == "trap") {
    if (params.size() != 4 || !(params[0] <= params[1] && params[1] <= params[2] && params[2] <= params[3])) {
      throw SchemaError(where + ": trap needs ordered params [a,b,c,d]");
    }
    for (double x : universe->points) mu.push_back(trapezoid(x, params[0], params[1], params[2], params[3]));
  } else {
    throw SchemaError(where + ": unknown shape '" + shape + "'");
  }
  return {universe, std::move(mu)};
}

json pointsJson(const FuzzySet &set) { return {{"shape", "points"}, {"mu", set.mu}}; }

class Decoder {
 public:
  KnowledgeBase decode(const json &doc) {
    if (!doc.is_object() || doc.empty()) throw SchemaError("KB document must be a non-empty JSON object");
    for (const char *key : {"universes", "variables", "rules", "situations", "acts", "dictionary", "plant", "version"}) {
      require(doc, key, "document");
    }
    kb_.version = requireString(doc, "version", "document");
    for (const auto &u : requireArray(doc, "universes", "document")) universe(u);
    for (const auto &v : requireArray(doc, "variables", "document")) variable(v);
    for (const auto &r : requireArray(doc, "rules", "document")) rule(r);
    for (const auto &s : requireArray(doc, "situations", "document")) {
      kb_.situations.push_back(situation(s, requireString(s, "id", "situation"), "situations"));
    }
    plant(require(doc, "plant", "document"));
    for (const auto &a : requireArray(doc, "acts", "document")) act(a);
    dictionary(require(doc, "dictionary", "document"));
    return std::move(kb_);
  }

 private:
  void universe(const json &u) {
    Universe out;
    out.id = requireString(u, "id", "universe");
    out.points = numbers(require(u, "points", "universes[" + out.id + "]"), "universes[" + out.id + "].points");
    out.unit_label = u.value("unit", "");
    kb_.universes.push_back(std::make_shared<const Universe>(std::move(out)));
  }

  void variable(const json &v) {
    LinguisticVariable out;
    out.name = requireString(v, "name", "variable");
    const auto where = "variables[" + out.name + "]";
    const auto uid = requireString(v, "universe", where);
    out.universe = kb_.findUniverse(uid);
    if (!out.universe) throw IntegrityError(uid, where + ": unknown universe '" + uid + "'");
    for (const auto &t : requireArray(v, "terms", where)) {
      Term term;
      term.label = requireString(t, "label", where + ".terms");
      term.set = membership(require(t, "membership", where), out.universe, nullptr,
                            where + ".terms[" + term.label + "]");
      out.terms.push_back(std::move(term));
    }
    if (v.contains("facets")) {
      const auto &facets = v.at("facets");
      if (!facets.is_object()) throw SchemaError(where + ": facets must be an object");
      for (const auto &[name, text] : facets.items()) {
        if (!text.is_string()) throw SchemaError(where + ": facet '" + name + "' must be text");
        out.facets[name] = text.get<std::string>();
      }
    }
    kb_.variables.push_back(std::move(out));
  }

  Proposition proposition(const json &p, const std::string &where) {
    return {requireString(p, "variable", where), requireString(p, "term", where)};
  }

  void rule(const json &r) {
    Rule out;
    out.id = requireString(r, "id", "rule");
    const auto where = "rules[" + out.id + "]";
    if (r.contains("level")) out.level = levelFromString(requireString(r, "level", where));
    for (const auto &p : requireArray(r, "antecedent", where)) out.antecedent.push_back(proposition(p, where));
    out.consequent = proposition(require(r, "consequent", where), where + ".consequent");
    if (r.contains("bindings")) {
      for (const auto &b : requireArray(r, "bindings", where)) {
        Binding binding;
        binding.variable = requireString(b, "variable", where + ".bindings");
        const auto *v = kb_.findVariable(binding.variable);
        if (!v) throw IntegrityError(binding.variable, where + ": binding on unknown variable");
        if (b.contains("term")) {
          binding.term = requireString(b, "term", where + ".bindings");
          binding.reference = membership(b, v->universe, v, where + ".bindings");
        } else {
          binding.reference = membership(require(b, "membership", where), v->universe, v, where + ".bindings");
        }
        out.bindings.push_back(std::move(binding));
      }
    }
    kb_.rules.push_back(std::move(out));
  }

  Situation situation(const json &s, std::string id, const std::string &context) {
    Situation out;
    out.id = std::move(id);
    const auto where = context + "[" + out.id + "]";
    if (s.contains("level")) out.level = levelFromString(requireString(s, "level", where));
    out.annotation = s.value("annotation", "");
    const auto &assignments = require(s, "assignments", where);
    if (!assignments.is_object()) throw SchemaError(where + ": assignments must be an object");
    for (const auto &[name, spec] : assignments.items()) {
      const auto *v = kb_.findVariable(name);
      if (!v) throw IntegrityError(name, where + ": unknown variable '" + name + "'");
      out.assignments.emplace(name, membership(spec, v->universe, v, where + ".assignments[" + name + "]"));
    }
    return out;
  }

  void act(const json &a) {
    ElementaryAct out;
    out.id = requireString(a, "id", "act");
    const auto where = "acts[" + out.id + "]";
    out.trigger = situation(require(a, "trigger", where), out.id + ".trigger", where);
    out.target = situation(require(a, "target", where), out.id + ".target", where);
    for (const auto &i : requireArray(a, "impacts", where)) {
      ImpactRule impact;
      impact.target_variable = requireString(i, "variable", where + ".impacts");
      if (i.contains("delta")) {
        impact.mode = ImpactMode::Delta;
        impact.value = number(i.at("delta"), where + ".impacts.delta");
      } else if (i.contains("set")) {
        impact.mode = ImpactMode::Set;
        impact.value = number(i.at("set"), where + ".impacts.set");
      } else {
        throw SchemaError(where + ": impact needs 'delta' or 'set'");
      }
      impact.description = i.value("description", "");
      out.impacts.push_back(std::move(impact));
    }
    out.inputs = crispVector(a, "x", where);
    out.controls = crispVector(a, "u", where);
    out.disturbances = crispVector(a, "w", where);
    kb_.acts.push_back(std::move(out));
  }

  void dictionary(const json &d) {
    auto &out = kb_.dictionary;
    for (const auto &l : requireArray(d, "languages", "dictionary")) {
      if (!l.is_string()) throw SchemaError("dictionary.languages must hold strings");
      out.languages.push_back(l.get<std::string>());
    }
    out.default_domain = d.value("default_domain", "");
    for (const auto &e : requireArray(d, "entries", "dictionary")) {
      DictionaryEntry entry;
      entry.surface_form = requireString(e, "surface", "dictionary.entries");
      const auto where = "dictionary[" + entry.surface_form + "]";
      entry.language = requireString(e, "language", where);
      entry.concept_id = requireString(e, "concept", where);
      if (e.contains("grammar")) {
        for (const auto &[k, v] : e.at("grammar").items()) {
          if (!v.is_string()) throw SchemaError(where + ": grammar attributes must be text");
          entry.grammar[k] = v.get<std::string>();
        }
      }
      if (e.contains("senses")) {
        for (const auto &s : requireArray(e, "senses", where)) {
          entry.senses.push_back({requireString(s, "concept", where), s.value("domain", out.default_domain)});
        }
      } else {
        entry.senses.push_back({entry.concept_id, out.default_domain});
      }
      out.entries.push_back(std::move(entry));
    }
  }

  void plant(const json &p) {
    auto &out = kb_.plant;
    out.model = p.value("model", "inventory");
    for (const auto &v : requireArray(p, "variables", "plant")) {
      PlantVariable pv;
      pv.name = requireString(v, "name", "plant.variables");
      const auto where = "plant[" + pv.name + "]";
      pv.min = number(require(v, "min", where), where);
      pv.max = number(require(v, "max", where), where);
      pv.initial = number(require(v, "initial", where), where);
      if (v.contains("observe_as")) pv.observe_as = requireString(v, "observe_as", where);
      out.variables.push_back(std::move(pv));
    }
    if (p.contains("setpoint")) {
      const auto &s = p.at("setpoint");
      out.setpoint = Setpoint{requireString(s, "variable", "plant.setpoint"), number(require(s, "low", "setpoint"), "setpoint"),
                              number(require(s, "high", "setpoint"), "setpoint")};
    }
  }

  KnowledgeBase kb_;
};

json situationJson(const Situation &s) {
  json out = {{"level", toString(s.level)}, {"annotation", s.annotation}};
  json assignments = json::object();
  for (const auto &[name, set] : s.assignments) assignments[name] = pointsJson(set);
  out["assignments"] = std::move(assignments);
  return out;
}

}  // namespace

KnowledgeBase parseKnowledgeBase(const json &document) {
  try {
    return Decoder().decode(document);
  } catch (const json::exception &e) {
    throw SchemaError(std::string("malformed KB document: ") + e.what());
  }
}

KnowledgeBase loadKnowledgeBase(const json &document) {
  auto kb = parseKnowledgeBase(document);
  const auto report = validateKnowledgeBase(kb);
  for (const auto &issue : report.issues) {
    if (issue.dangling) throw IntegrityError(issue.offending_id, issue.location + ": " + issue.message);
  }
  if (!report.ok()) throw SchemaError("invalid KB:\n" + report.summary());
  return kb;
}

KnowledgeBase loadKnowledgeBase(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error &e) {
    throw SchemaError(std::string("KB document is not valid JSON: ") + e.what());
  }
  return loadKnowledgeBase(doc);
}

KnowledgeBase loadKnowledgeBaseFile(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open KB file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return loadKnowledgeBase(std::string_view(buffer.str()));
}

json serializeKnowledgeBase(const KnowledgeBase &kb) {
  json doc;
  doc["version"] = kb.version;

  json universes = json::array();
  for (const auto &u : kb.universes) universes.push_back({{"id", u->id}, {"points", u->points}, {"unit", u->unit_label}});
  doc["universes"] = std::move(universes);

  json variables = json::array();
  for (const auto &v : kb.variables) {
    json terms = json::array();
    for (const auto &t : v.terms) terms.push_back({{"label", t.label}, {"membership", pointsJson(t.set)}});
    json var = {{"name", v.name}, {"universe", v.universe->id}, {"terms", std::move(terms)}};
    if (!v.facets.empty()) var["facets"] = v.facets;
    variables.push_back(std::move(var));
  }
  doc["variables"] = std::move(variables);

  json rules = json::array();
  for (const auto &r : kb.rules) {
    json antecedent = json::array();
    for (const auto &p : r.antecedent) antecedent.push_back({{"variable", p.variable}, {"term", p.term}});
    json bindings = json::array();
    for (const auto &b : r.bindings) {
      if (b.term) {
        bindings.push_back({{"variable", b.variable}, {"term", *b.term}});
      } else {
        bindings.push_back({{"variable", b.variable}, {"membership", pointsJson(b.reference)}});
      }
    }
    rules.push_back({{"id", r.id},
                     {"level", toString(r.level)},
                     {"antecedent", std::move(antecedent)},
                     {"consequent", {{"variable", r.consequent.variable}, {"term", r.consequent.term}}},
                     {"bindings", std::move(bindings)}});
  }
  doc["rules"] = std::move(rules);

  json situations = json::array();
  for (const auto &s : kb.situations) {
    auto sj = situationJson(s);
    sj["id"] = s.id;
    situations.push_back(std::move(sj));
  }
  doc["situations"] = std::move(situations);

  json acts = json::array();
  for (const auto &a : kb.acts) {
    json impacts = json::array();
    for (const auto &i : a.impacts) {
      impacts.push_back({{"variable", i.target_variable},
                         {i.mode == ImpactMode::Delta ? "delta" : "set", i.value},
                         {"description", i.description}});
    }
    acts.push_back({{"id", a.id},
                    {"trigger", situationJson(a.trigger)},
                    {"target", situationJson(a.target)},
                    {"impacts", std::move(impacts)},
                    {"x", a.inputs},
                    {"u", a.controls},
                    {"w", a.disturbances}});
  }
  doc["acts"] = std::move(acts);

  json entries = json::array();
  for (const auto &e : kb.dictionary.entries) {
    json senses = json::array();
    for (const auto &s : e.senses) senses.push_back({{"concept", s.concept_id}, {"domain", s.domain}});
    entries.push_back({{"surface", e.surface_form},
                       {"language", e.language},
                       {"concept", e.concept_id},
                       {"grammar", e.grammar},
                       {"senses", std::move(senses)}});
  }
  doc["dictionary"] = {{"languages", kb.dictionary.languages},
                       {"default_domain", kb.dictionary.default_domain},
                       {"entries", std::move(entries)}};

  json plant_vars = json::array();
  for (const auto &v : kb.plant.variables) {
    json pv = {{"name", v.name}, {"min", v.min}, {"max", v.max}, {"initial", v.initial}};
    if (v.observe_as) pv["observe_as"] = *v.observe_as;
    plant_vars.push_back(std::move(pv));
  }
  json plant = {{"model", kb.plant.model}, {"variables", std::move(plant_vars)}};
  if (kb.plant.setpoint) {
    plant["setpoint"] = {
        {"variable", kb.plant.setpoint->variable}, {"low", kb.plant.setpoint->low}, {"high", kb.plant.setpoint->high}};
  }
  doc["plant"] = std::move(plant);
  return doc;
}

}  // namespace sitfuzz
