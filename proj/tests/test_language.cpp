#include <doctest.h>

#include "sitfuzz/language.hpp"
#include "support.hpp"

using namespace sitfuzz;
using testsupport::demoKb;

namespace {

const DialogContext kInventory{"inventory"};

DialogAct parse(std::string_view text, std::string_view language = "en") {
  return parseUtterance(text, language, demoKb(), kInventory);
}

std::vector<std::string> surfaces(const std::vector<Token> &tokens) {
  std::vector<std::string> out;
  for (const auto &t : tokens) out.push_back(t.surface);
  return out;
}

// Every act the grammar can express over the demo KB.
std::vector<DialogAct> expressibleActs() {
  const auto &kb = demoKb();
  std::vector<DialogAct> acts;
  for (const auto &v : kb.variables) {
    acts.push_back({DialogKind::Query, {{"variable", v.name}}});
    for (const auto &t : v.terms) acts.push_back({DialogKind::Assert, {{"variable", v.name}, {"term", t.label}}});
  }
  acts.push_back({DialogKind::Why, {{"decision", std::string(kLastDecision)}}});
  for (const auto &a : kb.acts) {
    acts.push_back({DialogKind::Why, {{"decision", a.id}}});
    acts.push_back({DialogKind::Command, {{"act", a.id}}});
  }
  acts.push_back({DialogKind::Decide, {}});
  for (const char *n : {"1", "3", "12"}) acts.push_back({DialogKind::Plan, {{"horizon", n}}});
  return acts;
}

}  // namespace

TEST_CASE("tokenize") {
  const auto &d = demoKb().dictionary;
  CHECK(tokenize("set demand to high", "en", d).size() == 4);
  CHECK(tokenize("", "en", d).empty());
  const auto es = tokenize("¿Cuál es demanda?", "es", d);
  CHECK(surfaces(es) == std::vector<std::string>{"cuál", "es", "demanda"});
  CHECK(es[2].position == 2);
  CHECK(es[0].language == "es");
  CHECK(surfaces(tokenize("SET Demand, to HIGH!", "en", d)) == std::vector<std::string>{"set", "demand", "to", "high"});
  CHECK(surfaces(tokenize("ÚLTIMA  DECISIÓN", "es", d)) == std::vector<std::string>{"última", "decisión"});
  CHECK(surfaces(tokenize("apply restock_act", "en", d)) == std::vector<std::string>{"apply", "restock_act"});
  CHECK_THROWS_AS(tokenize("hola", "fr", d), UnsupportedLanguage);
}

TEST_CASE("lexicalLookup") {
  const auto &kb = demoKb();
  const auto tokens = tokenize("demand", "en", kb.dictionary);
  const auto units = lexicalLookup(tokens, "en", kb);
  REQUIRE(units.size() == 1);
  CHECK(units[0].senses == std::vector<Sense>{{"demand", "inventory"}});

  const auto stock = lexicalLookup(tokenize("stock", "en", kb.dictionary), "en", kb);
  CHECK(stock[0].senses.size() == 2);
  CHECK(stock[0].senses[1] == Sense{"stock_equity", "finance"});

  const auto phrase = lexicalLookup(tokenize("what should I do", "en", kb.dictionary), "en", kb);
  REQUIRE(phrase.size() == 1);
  CHECK(phrase[0].keywords == std::vector<std::string>{"kw.what_should_i_do"});

  const auto number = lexicalLookup(tokenize("plan 3 steps", "en", kb.dictionary), "en", kb);
  CHECK(number[1].number);

  try {
    lexicalLookup(tokenize("frobnicate demand and frobnicate", "en", kb.dictionary), "en", kb);
    FAIL("expected LexicalGap");
  } catch (const LexicalGap &e) {
    CHECK(e.words() == std::vector<std::string>{"frobnicate", "and"});
  }
}

TEST_CASE("disambiguation by domain, then by slot") {
  CHECK(parse("set demand to high").confidence == kDomainResolvedConfidence);

  // "stock": inventory vs finance senses; the session domain decides.
  const auto query = parse("what is stock");
  CHECK(query.arguments.at("variable") == "stock");
  CHECK(query.confidence == kDomainResolvedConfidence);

  // "none": a term and an act in the same domain; only the slot decides.
  const auto assert = parse("set order to none");
  CHECK(assert.arguments.at("term") == "none");
  CHECK(assert.confidence == kSlotResolvedConfidence);
  const auto command = parse("apply none");
  CHECK(command.arguments.at("act") == "hold_act");

  // "level": stock or demand, both variables of the same domain.
  try {
    parse("what is level");
    FAIL("expected Ambiguous");
  } catch (const Ambiguous &e) {
    CHECK(e.surface() == "level");
    CHECK(e.senses() == std::vector<std::string>{"stock", "demand"});
  }

  // Outside the inventory domain, "stock" keeps both senses and only one
  // fits a variable slot.
  const auto elsewhere = parseUtterance("what is stock", "en", demoKb(), {"media"});
  CHECK(elsewhere.arguments.at("variable") == "stock");
  CHECK(elsewhere.confidence == kSlotResolvedConfidence);
}

TEST_CASE("parseUtterance productions") {
  const auto a = parse("set demand to high");
  CHECK((a.kind == DialogKind::Assert));
  CHECK(a.arguments == std::map<std::string, std::string>{{"variable", "demand"}, {"term", "high"}});
  CHECK(a.confidence == 1.0);

  const auto why = parse("why last decision");
  CHECK((why.kind == DialogKind::Why));
  CHECK(why.arguments.at("decision") == kLastDecision);

  CHECK((parse("what should i do").kind == DialogKind::Decide));
  CHECK((parse("decide").kind == DialogKind::Decide));
  CHECK(parse("plan 3 steps").arguments.at("horizon") == "3");
  CHECK(parse("why restock_act").arguments.at("decision") == "restock_act");

  CHECK_THROWS_AS(parse(""), NoParse);
  CHECK_THROWS_AS(parse("set demand"), NoParse);
  CHECK_THROWS_AS(parse("set demand to none"), NoParse);  // none is not a demand term
  CHECK_THROWS_AS(parse("apply demand"), NoParse);
  CHECK_THROWS_AS(parse("set demand to high", "fr"), UnsupportedLanguage);
}

TEST_CASE("parallel utterances yield identical acts") {
  const std::vector<std::pair<std::string, std::string>> pairs{
      {"set demand to high", "fija demanda en alta"},
      {"what is stock", "¿cuál es inventario?"},
      {"what is order", "qué es pedido"},
      {"why last decision", "¿por qué última decisión?"},
      {"why restock_act", "por qué restock_act"},
      {"decide", "decide"},
      {"what should i do", "¿qué debo hacer?"},
      {"plan 4 steps", "planifica 4 pasos"},
      {"apply hold_act", "aplica hold_act"},
      {"set stock to medium", "fija inventario en media"},
  };
  for (const auto &[en, es] : pairs) {
    CAPTURE(en);
    const auto a = parse(en, "en");
    const auto b = parse(es, "es");
    CHECK(a.sameMeaning(b));
    CHECK(a.confidence == b.confidence);
  }
}

TEST_CASE("echo round trip for every expressible act and language") {
  const auto &kb = demoKb();
  for (const auto &language : kb.dictionary.languages) {
    for (const auto &act : expressibleActs()) {
      const auto text = synthesize(Echo{act}, language, kb);
      CAPTURE(text);
      CHECK(parseUtterance(text, language, kb, kInventory).sameMeaning(act));
    }
  }
}

TEST_CASE("parsing is deterministic") {
  for (int i = 0; i < 3; ++i) {
    const auto a = parse("set order to none");
    const auto b = parse("set order to none");
    CHECK(a.sameMeaning(b));
    CHECK(a.confidence == b.confidence);
  }
}

TEST_CASE("synthesis") {
  const auto &kb = demoKb();
  const Response ack = Acknowledgement{"demand", "high"};
  CHECK(synthesize(ack, "en", kb) == "Noted: demand is high.");
  CHECK(synthesize(ack, "es", kb) == "Entendido: demanda es alta.");

  const Response decision = DecisionReport{"restock_act", 0.9, {{"order", "large"}},
                                           {{"order", ImpactMode::Delta, 40, ""}}};
  CHECK(synthesize(decision, "en", kb) == "Decision restock_act (score 0.9): order large. Impacts: order +40.");
  CHECK(synthesize(decision, "es", kb) ==
        "Decisión restock_act (puntuación 0.9): pedido grande. Impactos: pedido +40.");

  const Response clarify = Clarification{Clarification::Reason::Ambiguous, "level", {"stock", "demand"}, ""};
  CHECK(synthesize(clarify, "en", kb) == "'level' is ambiguous between stock or demand. Which one do you mean?");
  CHECK(synthesize(clarify, "es", kb) == "'level' es ambiguo entre inventario o demanda. ¿Cuál quiere decir?");

  KnowledgeBase partial = kb;
  std::erase_if(partial.dictionary.entries,
                [](const DictionaryEntry &e) { return e.language == "es" && e.concept_id == "demand"; });
  CHECK_THROWS_AS(synthesize(ack, "es", partial), MissingSurfaceForm);
  CHECK_THROWS_AS(surfaceOf("demand", "es", partial), MissingSurfaceForm);
  CHECK_THROWS_AS(synthesize(ack, "fr", kb), UnsupportedLanguage);

  // Clarifications never throw, even for unknown concepts or bad bytes.
  const Response odd = Clarification{Clarification::Reason::UnknownWords, "", {"\xff\xfe", "zz"}, ""};
  CHECK(synthesize(odd, "es", partial).find("zz") != std::string::npos);
}
