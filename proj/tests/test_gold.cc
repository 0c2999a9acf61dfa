#include "doctest.h"

#include <fstream>
#include <set>
#include <sstream>

#include "gold_markup.h"

#include "geoscope/error.h"
#include "geoscope/pipeline.h"
#include "geoscope/text.h"

using namespace geoscope;
namespace fs = std::filesystem;

namespace {

const fs::path kGold = fs::path(GEOSCOPE_SOURCE_DIR) / "fixtures" / "gold";

const EvalSpan *find_span(const GoldFixture &fx, const std::string &surface) {
  for (const auto &s : fx.gold.spans) {
    for (const auto &d : fx.documents) {
      if (d.doc_id == s.doc_id && substr_cp(d.abstract, s.start, s.end) == surface) return &s;
    }
  }
  return nullptr;
}

}  // namespace

TEST_CASE("gold markup") {
  auto fx = parse_gold_markup(
      "# comment\n"
      "@@ d1 | fr | 2017-01-03 | Titre\n"
      "La [[concept:sécheresse]] de [[date:1995]]\n"
      "au [[ESA:Bénin]].\n"
      "\n"
      "@@ d2 | en | 2020 | Title\n"
      "[[ESR:Near Paris]], farms.\n");
  REQUIRE(fx.documents.size() == 2);
  CHECK(fx.documents[0].abstract == "La sécheresse de 1995 au Bénin.");
  CHECK(fx.documents[0].language == Language::kFr);
  CHECK(fx.documents[0].creation_date == PartialDate::of(2017, 1, 3));
  CHECK(fx.documents[1].abstract == "Near Paris, farms.");
  REQUIRE(fx.gold.spans.size() == 4);
  CHECK(fx.gold.spans[0] == EvalSpan{"d1", 3, 13, "thematic", "concept"});
  CHECK(fx.gold.spans[1] == EvalSpan{"d1", 17, 21, "temporal", "date"});
  CHECK(fx.gold.spans[2] == EvalSpan{"d1", 25, 30, "spatial", "ESA"});
  CHECK(fx.gold.spans[3] == EvalSpan{"d2", 0, 10, "spatial", "ESR"});

  CHECK_THROWS_AS(parse_gold_markup("@@ d | fr | 2017 | T\n[[town:Paris]]\n"), MalformedInput);
  CHECK_THROWS_AS(parse_gold_markup("@@ d | fr | 2017 | T\n[[ESA:Paris\n"), MalformedInput);
  CHECK_THROWS_AS(parse_gold_markup("@@ d | fr | 2017 | T\n[[ESA: Paris]]\n"), MalformedInput);
  CHECK_THROWS_AS(parse_gold_markup("@@ d | fr | someday | T\nParis\n"), MalformedInput);
  CHECK_THROWS_AS(parse_gold_markup("@@ d | xx | 2017 | T\nParis\n"), MalformedInput);
  CHECK_THROWS_AS(parse_gold_markup("@@ d | fr | 2017\nParis\n"), MalformedInput);
  CHECK_THROWS_AS(parse_gold_markup("Paris\n"), MalformedInput);
}

TEST_CASE("committed gold fixture matches its markup") {
  GoldFixture fx = load_gold_markup(kGold / "markup.txt");
  CHECK(fx.documents.size() == 20);
  CHECK(GoldCorpus::load(kGold / "gold.tsv").spans == fx.gold.spans);

  std::size_t files = corpus_files(kGold / "corpus").size();
  CHECK(files == fx.documents.size());
  std::set<Language> languages;
  for (const auto &r : fx.documents) {
    languages.insert(r.language);
    CHECK(read_corpus_document(kGold / "corpus" / (document_file_name(r.doc_id) + ".xml")) == r);
  }
  CHECK(languages.count(Language::kFr));
  CHECK(languages.count(Language::kEn));

  // The reference examples, each at its kind.
  const std::pair<const char *, const char *> examples[] = {
      {"golfe de Guinée", "ESA"}, {"au sud du Bénin", "ESR"}, {"fleuve Sénégal", "ESA"},
      {"Wujiang River Basin", "ESA"}, {"Near Paris", "ESR"}, {"lac Eyre", "ESA"}, {"Indian Ocean", "ESA"}};
  for (const auto &[surface, kind] : examples) {
    std::string text = surface;
    CAPTURE(text);
    const EvalSpan *s = find_span(fx, text);
    REQUIRE(s != nullptr);
    CHECK(s->kind == kind);
  }
}
