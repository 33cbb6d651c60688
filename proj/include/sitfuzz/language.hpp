#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sitfuzz/kb.hpp"

namespace sitfuzz {

struct Token {
  std::string surface;
  std::size_t position = 0;
  std::string language;
  bool operator==(const Token &) const = default;
};

/// Splits on whitespace and punctuation (ASCII plus the language's own
/// marks such as ¿ ¡), lowercases ASCII and Latin-1 letters. Bytes that are
/// not recognised punctuation stay inside words. Throws UnsupportedLanguage.
std::vector<Token> tokenize(std::string_view utterance, std::string_view language, const Dictionary &dictionary);

enum class ConceptCategory { Variable, Term, Act, Other };

/// Category of a concept id in the KB: variable name, term label of any
/// variable, act id, or none of these.
ConceptCategory categoryOf(std::string_view concept_id, const KnowledgeBase &kb);

/// One dictionary match over one or more tokens.
struct LexicalUnit {
  std::string surface;
  std::size_t position = 0;
  std::size_t length = 1;
  std::vector<std::string> keywords;  // grammar roles, e.g. "kw.set"
  std::vector<Sense> senses;          // content senses, unfiltered
  bool number = false;

  bool known() const { return number || !keywords.empty() || !senses.empty(); }
};

/// Longest-match lookup of the tokens in the language's lexicon. Numbers are
/// recognised directly. Throws LexicalGap listing every unknown surface.
std::vector<LexicalUnit> lexicalLookup(std::span<const Token> tokens, std::string_view language,
                                       const KnowledgeBase &kb);

enum class DialogKind { Assert, Query, Why, Decide, Plan, Command };

std::string_view toString(DialogKind kind);

struct DialogAct {
  DialogKind kind = DialogKind::Decide;
  std::map<std::string, std::string> arguments;  // role -> concept id
  double confidence = 1.0;
  std::string language;

  /// Same kind and same concept arguments.
  bool sameMeaning(const DialogAct &other) const { return kind == other.kind && arguments == other.arguments; }
};

/// Argument value of WHY that refers to the most recent decision.
inline constexpr std::string_view kLastDecision = "$last";

enum class SlotKind { Keyword, Variable, Term, Act, Number };

struct Slot {
  SlotKind kind = SlotKind::Keyword;
  std::string value;  // keyword concept, or argument role for content slots
};

/// One production of the controlled grammar.
struct Production {
  std::string name;
  DialogKind kind = DialogKind::Decide;
  std::vector<Slot> slots;
  std::map<std::string, std::string> fixed_arguments;
};

/// The productions, in matching order. The first production of each kind is
/// the canonical form used when echoing an act.
const std::vector<Production> &grammar();

struct DialogContext {
  std::string active_domain;
};

struct Resolution {
  std::vector<std::string> concepts;  // per unit; empty for keywords and numbers
  double confidence = 1.0;
};

/// Per content slot: keep the senses of the active domain (when any);
/// a single survivor resolves with confidence 1.0. Otherwise keep the senses
/// whose category fits the slot; a single survivor resolves with 0.8.
/// Throws Ambiguous when several survive, NoParse when none fits.
Resolution disambiguate(std::span<const LexicalUnit> units, const Production &pattern, const DialogContext &context,
                        const KnowledgeBase &kb);

inline constexpr double kDomainResolvedConfidence = 1.0;
inline constexpr double kSlotResolvedConfidence = 0.8;

/// Tokenize, look up, match a production, disambiguate, identify concepts.
/// Throws UnsupportedLanguage, LexicalGap, Ambiguous or NoParse.
DialogAct parseUtterance(std::string_view utterance, std::string_view language, const KnowledgeBase &kb,
                         const DialogContext &context);

// ---------------------------------------------------------------------------
// Synthesis

struct Acknowledgement {
  std::string variable;
  std::string term;
};

struct Answer {
  std::string variable;
  std::vector<std::pair<std::string, double>> degrees;  // term -> degree
  std::string best_term;
  double value = 0.0;
};

struct DecisionReport {
  std::string decision_id;
  double score = 0.0;
  std::vector<std::pair<std::string, std::string>> target_terms;  // variable -> term
  std::vector<ImpactRule> impacts;
};

struct PlanReport {
  struct Step {
    std::string decision_id;
    double score = 0.0;
    std::string variable;  // reported plant variable
    double value = 0.0;
  };
  std::vector<Step> steps;
};

struct ExplanationReport {
  std::string decision_id;
  std::vector<std::string> lines;
};

struct CommandReport {
  std::string act;
  double conformity = 0.0;
};

struct Clarification {
  enum class Reason { UnknownWords, Ambiguous, NoParse, Failure };
  Reason reason = Reason::NoParse;
  std::string subject;             // ambiguous surface
  std::vector<std::string> items;  // unknown words or candidate concepts
  std::string detail;
};

/// The canonical utterance for an act.
struct Echo {
  DialogAct act;
};

using Response = std::variant<Acknowledgement, Answer, DecisionReport, PlanReport, ExplanationReport,
                              CommandReport, Clarification, Echo>;

/// Deterministic template realization; concept ids are rendered with the
/// lexicon's first surface form in `language`. Clarifications fall back to
/// raw ids and never throw. Throws UnsupportedLanguage or MissingSurfaceForm.
std::string synthesize(const Response &response, std::string_view language, const KnowledgeBase &kb);

/// First surface form of `concept_id` in `language`. Throws MissingSurfaceForm.
std::string surfaceOf(std::string_view concept_id, std::string_view language, const KnowledgeBase &kb);

}  // namespace sitfuzz
