#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "geoscope/error.h"
#include "geoscope/text.h"
#include "geoscope/thematic.h"
#include "support/cvalue_oracle.h"

using namespace geoscope;

namespace {

const Thesaurus &agrovoc() {
  static const Thesaurus t =
      Thesaurus::load(std::filesystem::path(GEOSCOPE_SOURCE_DIR) / "resources" / "thesaurus.skos.xml");
  return t;
}

std::string skos(const std::string &body) {
  return R"(<?xml version="1.0"?>
<rdf:RDF xmlns:rdf="http://www.w3.org/1999/02/22-rdf-syntax-ns#" xmlns:skos="http://www.w3.org/2004/02/skos/core#">)" +
         body + "</rdf:RDF>";
}

std::string concept_xml(const std::string &uri, const std::string &pref, const std::string &broader = "",
                        const std::string &alt = "") {
  std::string s = "<skos:Concept rdf:about=\"" + uri + "\">";
  if (!pref.empty()) s += "<skos:prefLabel xml:lang=\"en\">" + pref + "</skos:prefLabel>";
  if (!alt.empty()) s += "<skos:altLabel xml:lang=\"en\">" + alt + "</skos:altLabel>";
  if (!broader.empty()) s += "<skos:broader rdf:resource=\"" + broader + "\"/>";
  return s + "</skos:Concept>";
}

DocumentRecord doc(std::string abstract, Language lang) {
  DocumentRecord r;
  r.doc_id = "d";
  r.title = "t";
  r.abstract = std::move(abstract);
  r.language = lang;
  return r;
}

const std::string kBase = "http://aims.example.org/agrovoc-subset/";

}  // namespace

TEST_CASE("load_skos") {
  SUBCASE("three concepts with a hierarchy") {
    Thesaurus t = Thesaurus::load_skos(skos(concept_xml("env", "environment") +
                                            concept_xml("cc", "climate change", "env", "global warming") +
                                            concept_xml("soil", "soil")));
    REQUIRE(t.concepts().size() == 3);
    auto chain = t.broader_chain("cc");
    REQUIRE(chain.size() == 1);
    CHECK(chain[0]->uri == "env");
    CHECK(t.broader_chain("env").empty());
    CHECK(t.lookup(label_key("Global Warming"), "en").front()->uri == "cc");
    CHECK(t.lookup(label_key("climate change"), "fr").empty());
  }
  SUBCASE("rdf:Description typed as concept") {
    Thesaurus t = Thesaurus::load_skos(skos(
        R"(<rdf:Description rdf:about="x"><rdf:type rdf:resource="http://www.w3.org/2004/02/skos/core#Concept"/>
           <skos:prefLabel>riz</skos:prefLabel></rdf:Description>)"));
    REQUIRE(t.concepts().size() == 1);
    // Untagged labels match in every language.
    CHECK(t.lookup("riz", "en").size() == 1);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(Thesaurus::load_skos(skos(concept_xml("a", ""))), MalformedSkos);
    CHECK_THROWS_AS(Thesaurus::load_skos(skos(concept_xml("a", "x") + concept_xml("a", "y"))), MalformedSkos);
    CHECK_THROWS_AS(Thesaurus::load_skos(skos(concept_xml("a", "x", "missing"))), MalformedSkos);
    CHECK_THROWS_AS(Thesaurus::load_skos("<rdf:RDF"), MalformedSkos);
    CHECK_THROWS_AS(Thesaurus::load_skos("<html/>"), MalformedSkos);
    CHECK_THROWS_AS(Thesaurus::load_skos(skos("<skos:Concept><skos:prefLabel>x</skos:prefLabel></skos:Concept>")),
                    MalformedSkos);
    try {
      Thesaurus::load_skos(skos(concept_xml("a", "x", "b") + concept_xml("b", "y", "c") + concept_xml("c", "z", "a")));
      FAIL("expected CyclicBroader");
    } catch (const CyclicBroader &e) {
      CHECK(std::string(e.what()).find("a -> b -> c -> a") != std::string::npos);
    }
  }
  SUBCASE("empty scheme") {
    CHECK(Thesaurus::load_skos(skos("")).concepts().empty());
    CHECK(annotate_thematic(doc("climate change", Language::kEn), Thesaurus::load_skos(skos(""))).empty());
  }
  CHECK(agrovoc().concepts().size() > 30);
}

TEST_CASE("annotate_thematic") {
  SUBCASE("pref label with broader chain") {
    auto a = annotate_thematic(doc("Le changement climatique menace les cultures.", Language::kFr), agrovoc());
    REQUIRE(a.size() == 1);
    CHECK(a[0].surface_text == "changement climatique");
    CHECK(a[0].concept_uri == kBase + "climate-change");
    CHECK(a[0].pref_label == "changement climatique");
    CHECK(a[0].used_for == std::vector<std::string>{"global warming", "réchauffement climatique"});
    REQUIRE(a[0].broader.size() == 2);
    CHECK(a[0].broader[0] == ConceptRef{kBase + "climate", "climat"});
    CHECK(a[0].broader[1] == ConceptRef{kBase + "environment", "environnement"});
  }
  SUBCASE("alt label gives the preferred label") {
    auto a = annotate_thematic(doc("Global warming affects maize.", Language::kEn), agrovoc());
    REQUIRE(a.size() == 2);
    CHECK(a[0].surface_text == "Global warming");
    CHECK(a[0].pref_label == "climate change");
    CHECK(a[1].pref_label == "maize");
    CHECK(a[1].broader.front().label == "cereals");
  }
  SUBCASE("plural, case and accent folding") {
    auto a = annotate_thematic(doc("Les SECHERESSES ont réduit les rendements.", Language::kFr), agrovoc());
    REQUIRE(a.size() == 2);
    CHECK(a[0].pref_label == "sécheresse");
    CHECK(a[1].surface_text == "rendements");
  }
  SUBCASE("longest match wins") {
    auto a = annotate_thematic(doc("L'érosion du sol et la gestion de l'eau.", Language::kFr), agrovoc());
    REQUIRE(a.size() == 2);
    CHECK(a[0].surface_text == "érosion du sol");
    CHECK(a[1].surface_text == "gestion de l'eau");
  }
  SUBCASE("no match across punctuation") {
    CHECK(annotate_thematic(doc("Le changement, climatique.", Language::kFr), agrovoc()).empty());
  }
  SUBCASE("mixed documents match per sentence language") {
    auto a = annotate_thematic(
        doc("La sécheresse frappe le Sahel. Drought hits the Sahel and the rice yields.", Language::kMixed),
        agrovoc());
    REQUIRE(a.size() == 4);
    CHECK(a[0].pref_label == "sécheresse");
    CHECK(a[1].pref_label == "drought");
    CHECK(a[2].surface_text == "rice");
    CHECK(a[3].pref_label == "yields");
  }
  SUBCASE("no thesaurus term") {
    CHECK(annotate_thematic(doc("Nothing relevant here.", Language::kEn), agrovoc()).empty());
  }
}

TEST_CASE("thematic matches equal a brute-force longest-match matcher") {
  // Brute force: at each step take the longest label occurrence anywhere in
  // the text (earliest on ties) that does not overlap previous picks.
  const std::vector<std::string> words = {"climate", "change", "global", "warming", "rice", "maize", "water",
                                          "management", "soil", "erosion", "land", "use", "the", "and", ",",
                                          "food", "security", "yields", "crop", "yield"};
  std::mt19937 rng(5);
  for (int iter = 0; iter < 300; ++iter) {
    std::string text;
    for (int k = 1 + rng() % 15; k > 0; --k) text += words[rng() % words.size()] + " ";
    auto got = match_concepts(doc(text, Language::kEn), agrovoc());

    std::vector<Token> tokens = tokenize(text);
    std::vector<std::pair<std::size_t, std::size_t>> taken;  // token ranges
    std::vector<Span> expected;
    while (true) {
      std::optional<std::pair<std::size_t, std::size_t>> best;
      for (std::size_t i = 0; i < tokens.size(); ++i) {
        for (std::size_t j = i + 1; j <= tokens.size(); ++j) {
          if (tokens[j - 1].type == TokenType::kPunct) break;
          bool free = std::all_of(taken.begin(), taken.end(), [&](auto &t) { return j <= t.first || t.second <= i; });
          if (!free) continue;
          std::string surface = substr_cp(text, tokens[i].begin, tokens[j - 1].end);
          if (agrovoc().lookup(label_key(surface), "en").empty()) continue;
          std::size_t len = tokens[j - 1].end - tokens[i].begin;
          if (!best || len > tokens[best->second - 1].end - tokens[best->first].begin) best = std::make_pair(i, j);
        }
      }
      if (!best) break;
      taken.push_back(*best);
      expected.push_back({tokens[best->first].begin, tokens[best->second - 1].end});
    }
    std::sort(expected.begin(), expected.end());
    std::vector<Span> spans;
    for (const auto &m : got) spans.push_back(m.span);
    CHECK(spans == expected);
    for (std::size_t i = 1; i < spans.size(); ++i) CHECK_FALSE(spans[i - 1].overlaps(spans[i]));
    // Broader chains reproduce the thesaurus hierarchy.
    for (const auto &a : enrich_concepts(got, agrovoc())) {
      const ThesaurusConcept *c = agrovoc().find(a.concept_uri);
      for (const auto &b : a.broader) {
        REQUIRE(c->broader_uri);
        CHECK(*c->broader_uri == b.uri);
        c = agrovoc().find(b.uri);
      }
      CHECK_FALSE(c->broader_uri);
    }
  }
}

TEST_CASE("C-value") {
  SUBCASE("worked example") {
    auto terms = extract_terms_cvalue({"climate change impacts climate change adaptation"}, Language::kEn);
    auto it = std::find_if(terms.begin(), terms.end(), [](auto &t) { return t.surface == "climate change"; });
    REQUIRE(it != terms.end());
    CHECK(it->frequency == 2);
    CHECK(it->length_words == 2);
    CHECK(it->c_value == doctest::Approx(std::log2(3.0)));
    CHECK(std::count(it->nested_in.begin(), it->nested_in.end(), "climate change impacts") == 1);
    CHECK(std::count(it->nested_in.begin(), it->nested_in.end(), "climate change adaptation") == 1);
    CHECK(it->tf_idf == 0);
  }
  SUBCASE("single non-nested word") {
    auto terms = extract_terms_cvalue({"erosion"}, Language::kEn);
    REQUIRE(terms.size() == 1);
    CHECK(terms[0].c_value == doctest::Approx(1.0));
  }
  SUBCASE("tf-idf and ranking") {
    auto terms = extract_terms_cvalue({"soil erosion in the basin", "soil erosion and rice", "rice"}, Language::kEn);
    auto find = [&](const std::string &s) {
      return *std::find_if(terms.begin(), terms.end(), [&](auto &t) { return t.surface == s; });
    };
    CHECK(find("soil erosion").tf_idf == doctest::Approx(2 * std::log(3.0 / 2.0)));
    CHECK(find("basin").tf_idf == doctest::Approx(std::log(3.0)));
    CHECK(find("soil erosion").c_value == doctest::Approx(std::log2(3.0) * 2));
    for (std::size_t i = 1; i < terms.size(); ++i) {
      const auto &a = terms[i - 1], &b = terms[i];
      bool ordered = a.c_value > b.c_value ||
                     (a.c_value == b.c_value && (a.frequency > b.frequency ||
                                                 (a.frequency == b.frequency && a.surface < b.surface)));
      CHECK(ordered);
    }
  }
  SUBCASE("stopwords and punctuation delimit candidates") {
    auto chunks = term_chunks("The impact of climate change, on rice yields in 2010.", Language::kEn);
    CHECK(chunks == std::vector<std::vector<std::string>>{{"impact"}, {"climate", "change"}, {"rice", "yields"}});
  }
  SUBCASE("empty corpus") {
    CHECK_THROWS_AS(extract_terms_cvalue({}, Language::kEn), EmptyCorpus);
    CHECK_THROWS_AS(extract_terms_cvalue({"", "  "}, Language::kEn), EmptyCorpus);
  }
  SUBCASE("equals the formula on every small corpus") {
    std::mt19937 rng(17);
    for (int iter = 0; iter < 300; ++iter) {
      std::vector<std::string> corpus = geoscope::testing::small_term_corpus(rng);
      if (std::all_of(corpus.begin(), corpus.end(), [](auto &a) { return term_chunks(a, Language::kEn).empty(); })) {
        CHECK_THROWS_AS(extract_terms_cvalue(corpus, Language::kEn), EmptyCorpus);
        continue;
      }
      auto expected = geoscope::testing::brute_cvalue(corpus);
      auto terms = extract_terms_cvalue(corpus, Language::kEn);
      REQUIRE(terms.size() == expected.size());
      for (const auto &t : terms) {
        REQUIRE(expected.count(t.surface));
        CHECK(t.c_value == doctest::Approx(expected[t.surface]).epsilon(1e-12));
        CHECK(std::isfinite(t.tf_idf));
        CHECK(t.c_value >= 0);
      }
      CHECK(terms == extract_terms_cvalue(corpus, Language::kEn));
    }
  }
}
