#include "sitfuzz/language.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "sitfuzz/format.hpp"

namespace sitfuzz {

// ---------------------------------------------------------------------------
// Tokenizer

namespace {

// Punctuation marks beyond ASCII that each language drops.
const std::map<std::string, std::vector<std::string>, std::less<>> &languageMarks() {
  static const std::map<std::string, std::vector<std::string>, std::less<>> marks{
      {"en", {"“", "”", "‘", "’", "…"}},
      {"es", {"¿", "¡", "«", "»", "…"}},
  };
  return marks;
}

bool isAsciiSeparator(unsigned char c) {
  if (c >= 0x80) return false;
  if (std::isspace(c) || std::iscntrl(c)) return true;
  return std::ispunct(c) && c != '_' && c != '-';
}

/// Replaces invalid UTF-8 with U+FFFD so the text can travel in JSON.
std::string sanitizeUtf8(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    std::size_t len = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xE ? 3 : (c >> 3) == 0x1E ? 4 : 0;
    bool valid = len > 0 && i + len <= text.size();
    for (std::size_t k = 1; valid && k < len; ++k) valid = (static_cast<unsigned char>(text[i + k]) >> 6) == 0x2;
    if (valid && len == 2) valid = c >= 0xC2;
    if (valid) {
      out.append(text.substr(i, len));
      i += len;
    } else {
      out += "�";
      ++i;
    }
  }
  return out;
}

}  // namespace

std::vector<Token> tokenize(std::string_view utterance, std::string_view language, const Dictionary &dictionary) {
  if (!dictionary.supports(language)) throw UnsupportedLanguage(std::string(language));
  static const std::vector<std::string> no_marks;
  const auto marks_it = languageMarks().find(language);
  const auto &marks = marks_it == languageMarks().end() ? no_marks : marks_it->second;

  std::vector<Token> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) {
      tokens.push_back({std::move(current), tokens.size(), std::string(language)});
      current.clear();
    }
  };

  std::size_t i = 0;
  while (i < utterance.size()) {
    const auto c = static_cast<unsigned char>(utterance[i]);
    if (isAsciiSeparator(c)) {
      flush();
      ++i;
      continue;
    }
    if (c < 0x80) {
      current += static_cast<char>(std::tolower(c));
      ++i;
      continue;
    }
    auto mark = std::find_if(marks.begin(), marks.end(),
                             [&](const std::string &m) { return utterance.substr(i).starts_with(m); });
    if (mark != marks.end()) {
      flush();
      i += mark->size();
      continue;
    }
    // Latin-1 capitals (U+00C0..U+00DE except U+00D7) fold to lower case.
    if (c == 0xC3 && i + 1 < utterance.size()) {
      const auto next = static_cast<unsigned char>(utterance[i + 1]);
      if (next >= 0x80 && next <= 0x9E && next != 0x97) {
        current += static_cast<char>(0xC3);
        current += static_cast<char>(next + 0x20);
        i += 2;
        continue;
      }
    }
    current += static_cast<char>(c);
    ++i;
  }
  flush();
  return tokens;
}

ConceptCategory categoryOf(std::string_view concept_id, const KnowledgeBase &kb) {
  if (kb.findVariable(concept_id)) return ConceptCategory::Variable;
  if (kb.findAct(concept_id)) return ConceptCategory::Act;
  for (const auto &v : kb.variables) {
    if (v.findTerm(concept_id)) return ConceptCategory::Term;
  }
  return ConceptCategory::Other;
}

// ---------------------------------------------------------------------------
// Lexical lookup

std::vector<LexicalUnit> lexicalLookup(std::span<const Token> tokens, std::string_view language,
                                       const KnowledgeBase &kb) {
  struct Candidate {
    std::vector<std::string> words;
    const DictionaryEntry *entry;
  };
  std::vector<Candidate> candidates;
  std::size_t longest = 1;
  for (const auto &e : kb.dictionary.entries) {
    if (e.language != language) continue;
    std::vector<std::string> words;
    for (auto &t : tokenize(e.surface_form, language, kb.dictionary)) words.push_back(std::move(t.surface));
    if (words.empty()) continue;
    longest = std::max(longest, words.size());
    candidates.push_back({std::move(words), &e});
  }

  std::vector<LexicalUnit> units;
  std::vector<std::string> unknown;
  std::size_t i = 0;
  while (i < tokens.size()) {
    LexicalUnit unit;
    unit.position = tokens[i].position;
    for (std::size_t len = std::min(longest, tokens.size() - i); len >= 1 && !unit.known(); --len) {
      for (const auto &c : candidates) {
        if (c.words.size() != len) continue;
        bool match = true;
        for (std::size_t k = 0; k < len && match; ++k) match = c.words[k] == tokens[i + k].surface;
        if (!match) continue;
        if (c.entry->isKeyword()) {
          if (std::find(unit.keywords.begin(), unit.keywords.end(), c.entry->concept_id) == unit.keywords.end()) {
            unit.keywords.push_back(c.entry->concept_id);
          }
        } else {
          for (const auto &s : c.entry->senses) {
            if (std::find(unit.senses.begin(), unit.senses.end(), s) == unit.senses.end()) unit.senses.push_back(s);
          }
        }
        unit.length = len;
      }
    }
    if (!unit.known()) {
      const auto &word = tokens[i].surface;
      unit.number = !word.empty() && word.size() <= 9 &&
                    std::all_of(word.begin(), word.end(), [](unsigned char ch) { return std::isdigit(ch); });
      unit.length = 1;
    }
    for (std::size_t k = 0; k < unit.length; ++k) {
      if (k) unit.surface += ' ';
      unit.surface += tokens[i + k].surface;
    }
    if (!unit.known() && std::find(unknown.begin(), unknown.end(), unit.surface) == unknown.end()) {
      unknown.push_back(unit.surface);
    }
    i += unit.length;
    units.push_back(std::move(unit));
  }
  if (!unknown.empty()) throw LexicalGap(std::move(unknown));
  return units;
}

// ---------------------------------------------------------------------------
// Grammar and parsing

std::string_view toString(DialogKind kind) {
  switch (kind) {
    case DialogKind::Assert:
      return "ASSERT";
    case DialogKind::Query:
      return "QUERY";
    case DialogKind::Why:
      return "WHY";
    case DialogKind::Decide:
      return "DECIDE";
    case DialogKind::Plan:
      return "PLAN";
    case DialogKind::Command:
      return "COMMAND";
  }
  return "DECIDE";
}

const std::vector<Production> &grammar() {
  using K = SlotKind;
  static const std::vector<Production> productions{
      {"assert", DialogKind::Assert, {{K::Keyword, "kw.set"}, {K::Variable, "variable"}, {K::Keyword, "kw.to"}, {K::Term, "term"}}, {}},
      {"query", DialogKind::Query, {{K::Keyword, "kw.what"}, {K::Keyword, "kw.is"}, {K::Variable, "variable"}}, {}},
      {"why-last", DialogKind::Why, {{K::Keyword, "kw.why"}, {K::Keyword, "kw.last"}, {K::Keyword, "kw.decision"}},
       {{"decision", std::string(kLastDecision)}}},
      {"why-id", DialogKind::Why, {{K::Keyword, "kw.why"}, {K::Act, "decision"}}, {}},
      {"decide", DialogKind::Decide, {{K::Keyword, "kw.decide"}}, {}},
      {"what-should-i-do", DialogKind::Decide, {{K::Keyword, "kw.what_should_i_do"}}, {}},
      {"plan", DialogKind::Plan, {{K::Keyword, "kw.plan"}, {K::Number, "horizon"}, {K::Keyword, "kw.steps"}}, {}},
      {"command", DialogKind::Command, {{K::Keyword, "kw.apply"}, {K::Act, "act"}}, {}},
  };
  return productions;
}

namespace {

bool fits(SlotKind slot, ConceptCategory category) {
  switch (slot) {
    case SlotKind::Variable:
      return category == ConceptCategory::Variable;
    case SlotKind::Term:
      return category == ConceptCategory::Term;
    case SlotKind::Act:
      return category == ConceptCategory::Act;
    default:
      return false;
  }
}

bool structurallyMatches(std::span<const LexicalUnit> units, const Production &p) {
  if (units.size() != p.slots.size()) return false;
  for (std::size_t i = 0; i < units.size(); ++i) {
    const auto &slot = p.slots[i];
    const auto &unit = units[i];
    switch (slot.kind) {
      case SlotKind::Keyword:
        if (std::find(unit.keywords.begin(), unit.keywords.end(), slot.value) == unit.keywords.end()) return false;
        break;
      case SlotKind::Number:
        if (!unit.number) return false;
        break;
      default:
        if (unit.senses.empty()) return false;
    }
  }
  return true;
}

std::vector<std::string> uniqueConcepts(const std::vector<Sense> &senses) {
  std::vector<std::string> out;
  for (const auto &s : senses) {
    if (std::find(out.begin(), out.end(), s.concept_id) == out.end()) out.push_back(s.concept_id);
  }
  return out;
}

}  // namespace

Resolution disambiguate(std::span<const LexicalUnit> units, const Production &pattern, const DialogContext &context,
                        const KnowledgeBase &kb) {
  Resolution out;
  out.concepts.resize(units.size());
  for (std::size_t i = 0; i < units.size() && i < pattern.slots.size(); ++i) {
    const auto &slot = pattern.slots[i];
    const auto &unit = units[i];
    if (slot.kind == SlotKind::Keyword) continue;
    if (slot.kind == SlotKind::Number) {
      out.concepts[i] = unit.surface;
      continue;
    }

    // Prior resolution: thematic domain of the session.
    std::vector<Sense> in_domain;
    std::copy_if(unit.senses.begin(), unit.senses.end(), std::back_inserter(in_domain),
                 [&](const Sense &s) { return s.domain == context.active_domain; });
    const auto after_domain = uniqueConcepts(in_domain.empty() ? unit.senses : in_domain);
    if (after_domain.size() == 1) {
      if (!fits(slot.kind, categoryOf(after_domain.front(), kb))) {
        throw NoParse("'" + unit.surface + "' does not fit the " + slot.value + " slot");
      }
      out.concepts[i] = after_domain.front();
      continue;
    }

    // Final resolution: grammatical slot of the recognised pattern.
    std::vector<std::string> fitting;
    std::copy_if(after_domain.begin(), after_domain.end(), std::back_inserter(fitting),
                 [&](const std::string &c) { return fits(slot.kind, categoryOf(c, kb)); });
    if (fitting.empty()) throw NoParse("'" + unit.surface + "' does not fit the " + slot.value + " slot");
    if (fitting.size() > 1) throw Ambiguous(unit.surface, fitting);
    out.concepts[i] = fitting.front();
    out.confidence = std::min(out.confidence, kSlotResolvedConfidence);
  }
  return out;
}

DialogAct parseUtterance(std::string_view utterance, std::string_view language, const KnowledgeBase &kb,
                         const DialogContext &context) {
  const auto tokens = tokenize(utterance, language, kb.dictionary);
  if (tokens.empty()) throw NoParse("empty utterance");
  const auto units = lexicalLookup(tokens, language, kb);

  std::optional<NoParse> last_failure;
  for (const auto &production : grammar()) {
    if (!structurallyMatches(units, production)) continue;
    Resolution resolution;
    try {
      resolution = disambiguate(units, production, context, kb);
    } catch (const NoParse &e) {
      last_failure = e;
      continue;
    }
    DialogAct act{production.kind, production.fixed_arguments, resolution.confidence, std::string(language)};
    for (std::size_t i = 0; i < production.slots.size(); ++i) {
      if (production.slots[i].kind != SlotKind::Keyword) act.arguments[production.slots[i].value] = resolution.concepts[i];
    }
    if (act.kind == DialogKind::Assert && !kb.findTerm(act.arguments["variable"], act.arguments["term"])) {
      last_failure = NoParse("'" + act.arguments["term"] + "' is not a term of '" + act.arguments["variable"] + "'");
      continue;
    }
    return act;
  }
  if (last_failure) throw *last_failure;
  throw NoParse("no production matches");
}

// ---------------------------------------------------------------------------
// Synthesis

namespace {

struct Templates {
  const char *acknowledgement;  // {variable} {term}
  const char *answer;           // {variable} {term} {degrees} {value}
  const char *decision;         // {decision} {score} {targets} {impacts}
  const char *plan;             // {n} {steps}
  const char *plan_step;        // {i} {decision} {score} {variable} {value}
  const char *explanation;      // {decision}
  const char *command;          // {act} {conformity}
  const char *unknown_words;    // {items}
  const char *ambiguous;        // {subject} {items}
  const char *no_parse;         // {detail}
  const char *failure;          // {detail}
  const char *nothing;
  const char *conjunction;
};

const Templates *templatesFor(std::string_view language) {
  static const Templates en{
      "Noted: {variable} is {term}.",
      "{variable} is {term} (degrees: {degrees}); crisp value {value}.",
      "Decision {decision} (score {score}): {targets}. Impacts: {impacts}.",
      "Plan for {n} steps: {steps}.",
      "{i}. {decision} (score {score}) -> {variable} {value}",
      "Explanation of {decision}:",
      "Applying {act} (conformity {conformity}); its impacts take effect at the next tick.",
      "I do not know the words: {items}. Please rephrase.",
      "'{subject}' is ambiguous between {items}. Which one do you mean?",
      "I could not understand that ({detail}). Try: set <variable> to <term>, what is <variable>, what should i "
      "do, why last decision, plan <n> steps, apply <act>.",
      "I could not do that: {detail}.",
      "nothing",
      " or ",
  };
  static const Templates es{
      "Entendido: {variable} es {term}.",
      "{variable} es {term} (grados: {degrees}); valor nítido {value}.",
      "Decisión {decision} (puntuación {score}): {targets}. Impactos: {impacts}.",
      "Plan de {n} pasos: {steps}.",
      "{i}. {decision} (puntuación {score}) -> {variable} {value}",
      "Explicación de {decision}:",
      "Aplicando {act} (conformidad {conformity}); sus impactos se aplican en el próximo ciclo.",
      "No conozco las palabras: {items}. Reformule, por favor.",
      "'{subject}' es ambiguo entre {items}. ¿Cuál quiere decir?",
      "No entendí ({detail}). Pruebe: fija <variable> en <término>, cuál es <variable>, qué debo hacer, por qué "
      "última decisión, planifica <n> pasos, aplica <acto>.",
      "No pude hacerlo: {detail}.",
      "nada",
      " o ",
  };
  if (language == "en") return &en;
  if (language == "es") return &es;
  return nullptr;
}

std::string fill(std::string text, const std::map<std::string, std::string> &values) {
  for (const auto &[key, value] : values) {
    const std::string placeholder = "{" + key + "}";
    for (auto pos = text.find(placeholder); pos != std::string::npos; pos = text.find(placeholder, pos + value.size())) {
      text.replace(pos, placeholder.size(), value);
    }
  }
  return text;
}

std::string join(const std::vector<std::string> &parts, std::string_view separator) {
  std::string out;
  for (const auto &p : parts) {
    if (!out.empty()) out += separator;
    out += p;
  }
  return out;
}

const DictionaryEntry *firstEntry(std::string_view concept_id, std::string_view language, const KnowledgeBase &kb,
                                  bool keyword) {
  for (const auto &e : kb.dictionary.entries) {
    if (e.concept_id == concept_id && e.language == language && e.isKeyword() == keyword) return &e;
  }
  return nullptr;
}

std::string keywordSurface(std::string_view keyword, std::string_view language, const KnowledgeBase &kb) {
  const auto *e = firstEntry(keyword, language, kb, true);
  if (!e) throw MissingSurfaceForm(std::string(keyword) + " in " + std::string(language));
  return e->surface_form;
}

/// KB concepts must have a surface form; plant-only names pass through.
std::string render(std::string_view name, std::string_view language, const KnowledgeBase &kb) {
  if (categoryOf(name, kb) == ConceptCategory::Other) return std::string(name);
  return surfaceOf(name, language, kb);
}

/// Never throws: clarifications must always be producible.
std::string renderLoosely(std::string_view name, std::string_view language, const KnowledgeBase &kb) {
  const auto *e = firstEntry(name, language, kb, false);
  return e ? e->surface_form : sanitizeUtf8(name);
}

std::string impactText(const ImpactRule &i, std::string_view language, const KnowledgeBase &kb) {
  std::string sign = i.mode == ImpactMode::Set ? " =" : (i.value >= 0 ? " +" : " ");
  return render(i.target_variable, language, kb) + sign + formatNumber(i.value);
}

std::string echo(const DialogAct &act, std::string_view language, const KnowledgeBase &kb) {
  for (const auto &p : grammar()) {
    if (p.kind != act.kind) continue;
    bool fixed_match = std::all_of(p.fixed_arguments.begin(), p.fixed_arguments.end(), [&](const auto &kv) {
      auto it = act.arguments.find(kv.first);
      return it != act.arguments.end() && it->second == kv.second;
    });
    if (!fixed_match) continue;
    std::vector<std::string> words;
    bool complete = true;
    for (const auto &slot : p.slots) {
      if (slot.kind == SlotKind::Keyword) {
        words.push_back(keywordSurface(slot.value, language, kb));
        continue;
      }
      auto it = act.arguments.find(slot.value);
      if (it == act.arguments.end()) {
        complete = false;
        break;
      }
      words.push_back(slot.kind == SlotKind::Number ? it->second : surfaceOf(it->second, language, kb));
    }
    if (complete) return join(words, " ");
  }
  throw NoParse("no production realizes " + std::string(toString(act.kind)));
}

}  // namespace

std::string surfaceOf(std::string_view concept_id, std::string_view language, const KnowledgeBase &kb) {
  const auto *e = firstEntry(concept_id, language, kb, false);
  if (!e) throw MissingSurfaceForm(std::string(concept_id) + " has no surface form in " + std::string(language));
  return e->surface_form;
}

std::string synthesize(const Response &response, std::string_view language, const KnowledgeBase &kb) {
  if (!kb.dictionary.supports(language)) throw UnsupportedLanguage(std::string(language));
  const auto *t = templatesFor(language);
  if (!t) throw UnsupportedLanguage(std::string(language) + " has no response templates");

  struct Visitor {
    const Templates &t;
    std::string_view language;
    const KnowledgeBase &kb;

    std::string operator()(const Acknowledgement &a) const {
      return fill(t.acknowledgement,
                  {{"variable", render(a.variable, language, kb)}, {"term", render(a.term, language, kb)}});
    }
    std::string operator()(const Answer &a) const {
      std::vector<std::string> degrees;
      for (const auto &[term, degree] : a.degrees) degrees.push_back(render(term, language, kb) + " " + formatNumber(degree));
      return fill(t.answer, {{"variable", render(a.variable, language, kb)},
                             {"term", render(a.best_term, language, kb)},
                             {"degrees", join(degrees, ", ")},
                             {"value", formatNumber(a.value)}});
    }
    std::string operator()(const DecisionReport &d) const {
      std::vector<std::string> targets;
      for (const auto &[variable, term] : d.target_terms) {
        targets.push_back(render(variable, language, kb) + " " + render(term, language, kb));
      }
      std::vector<std::string> impacts;
      for (const auto &i : d.impacts) impacts.push_back(impactText(i, language, kb));
      return fill(t.decision, {{"decision", render(d.decision_id, language, kb)},
                               {"score", formatNumber(d.score)},
                               {"targets", targets.empty() ? t.nothing : join(targets, ", ")},
                               {"impacts", impacts.empty() ? t.nothing : join(impacts, ", ")}});
    }
    std::string operator()(const PlanReport &p) const {
      std::vector<std::string> steps;
      for (std::size_t i = 0; i < p.steps.size(); ++i) {
        const auto &s = p.steps[i];
        steps.push_back(fill(t.plan_step, {{"i", std::to_string(i + 1)},
                                           {"decision", render(s.decision_id, language, kb)},
                                           {"score", formatNumber(s.score)},
                                           {"variable", render(s.variable, language, kb)},
                                           {"value", formatNumber(s.value)}}));
      }
      return fill(t.plan, {{"n", std::to_string(p.steps.size())}, {"steps", steps.empty() ? t.nothing : join(steps, "; ")}});
    }
    std::string operator()(const ExplanationReport &e) const {
      auto text = fill(t.explanation, {{"decision", render(e.decision_id, language, kb)}});
      for (const auto &line : e.lines) text += "\n" + line;
      return text;
    }
    std::string operator()(const CommandReport &c) const {
      return fill(t.command, {{"act", render(c.act, language, kb)}, {"conformity", formatNumber(c.conformity)}});
    }
    std::string operator()(const Clarification &c) const {
      std::vector<std::string> items;
      for (const auto &i : c.items) items.push_back(c.reason == Clarification::Reason::Ambiguous ? renderLoosely(i, language, kb) : sanitizeUtf8(i));
      switch (c.reason) {
        case Clarification::Reason::UnknownWords:
          return fill(t.unknown_words, {{"items", join(items, ", ")}});
        case Clarification::Reason::Ambiguous:
          return fill(t.ambiguous, {{"subject", sanitizeUtf8(c.subject)}, {"items", join(items, t.conjunction)}});
        case Clarification::Reason::NoParse:
          return fill(t.no_parse, {{"detail", sanitizeUtf8(c.detail)}});
        case Clarification::Reason::Failure:
          return fill(t.failure, {{"detail", sanitizeUtf8(c.detail)}});
      }
      return fill(t.failure, {{"detail", sanitizeUtf8(c.detail)}});
    }
    std::string operator()(const Echo &e) const { return echo(e.act, language, kb); }
  };
  return std::visit(Visitor{*t, language, kb}, response);
}

}  // namespace sitfuzz
