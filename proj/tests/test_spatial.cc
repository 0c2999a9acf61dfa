#include "doctest.h"

#include <random>

#include "geoscope/error.h"
#include "geoscope/spatial.h"
#include "geoscope/text.h"

using namespace geoscope;

namespace {

const std::filesystem::path kResources = std::filesystem::path(GEOSCOPE_SOURCE_DIR) / "resources";

const Gazetteer &gazetteer() {
  static const Gazetteer g = Gazetteer::load(kResources / "gazetteer.tsv");
  return g;
}

const SpatialLexicon &lexicon() {
  static const SpatialLexicon l = SpatialLexicon::load(kResources);
  return l;
}

std::vector<SpatialAnnotation> extract(std::string_view text, Language lang) {
  return extract_spatial_candidates(text, lang, lexicon(), gazetteer());
}

const SpatialAnnotation *find_surface(const std::vector<SpatialAnnotation> &anns, std::string_view surface) {
  for (const auto &a : anns) {
    if (a.surface_text == surface) return &a;
  }
  return nullptr;
}

DocumentRecord doc(std::string abstract, Language lang) {
  DocumentRecord r;
  r.doc_id = "d";
  r.title = "t";
  r.abstract = std::move(abstract);
  r.language = lang;
  return r;
}

SpatialAnnotation esa(std::string surface, std::optional<std::string> feature_noun = std::nullopt) {
  SpatialAnnotation a;
  a.span = {0, code_point_length(surface)};
  a.surface_text = std::move(surface);
  a.feature_noun = std::move(feature_noun);
  return a;
}

SpatialAnnotation resolved_in(const std::string &country) {
  SpatialAnnotation a = esa("x");
  a.resolution = GazetteerResolution{"x", "x", 0, 0, FeatureClass::kPopulatedPlace, country, 1};
  return a;
}

}  // namespace

TEST_CASE("gazetteer loading and lookup") {
  const Gazetteer &g = gazetteer();
  auto senegal = g.lookup("senegal");
  REQUIRE(senegal.size() == 2);
  CHECK(senegal[0]->gazetteer_id == "senegal-river");
  CHECK(senegal[1]->gazetteer_id == "sn");
  CHECK(g.lookup("ÉTATS-UNIS").front()->gazetteer_id == "us");
  CHECK(g.lookup("Atlantis").empty());
  auto chain = g.ancestors("bayonne-fr");
  REQUIRE(chain.size() == 3);
  CHECK(chain[0]->gazetteer_id == "fr-64");
  CHECK(chain[2]->gazetteer_id == "fr");
  CHECK(g.find("allada-plateau")->names[1] == GazetteerName{"Plateau d'Allada", "fr"});
  CHECK(g.max_name_tokens() >= 4);

  CHECK_THROWS_AS(Gazetteer::parse("a\tA\t\t1\t2\tcountry\tXX\t0\n"), ResourceError);
  CHECK_THROWS_AS(Gazetteer::parse("a\tA\t\t91\t2\tcountry\tXX\t0\t\n"), ResourceError);
  CHECK_THROWS_AS(Gazetteer::parse("a\tA\t\t1\t2\tplanet\tXX\t0\t\n"), ResourceError);
  CHECK_THROWS_AS(Gazetteer::parse("a\tA\t\t1\t2\tcountry\tXX\t0\tb\nb\tB\t\t1\t2\tcountry\tXX\t0\ta\n"),
                  ResourceError);
  CHECK_THROWS_AS(Gazetteer::parse("a\tA\t\t1\t2\tcountry\tXX\t0\tzz\n"), ResourceError);
  CHECK_THROWS_AS(Gazetteer::parse("a\tA\t\t1\t2\tcountry\tXX\t0\t\na\tB\t\t1\t2\tcountry\tXX\t0\t\n"),
                  ResourceError);
}

TEST_CASE("lexicon covers the five indicator categories") {
  for (Language l : {Language::kFr, Language::kEn}) {
    const auto &lex = lexicon().of(l);
    for (Indicator ind : {Indicator::kOrientation, Indicator::kDistance, Indicator::kAdjacency, Indicator::kInclusion,
                          Indicator::kGeometricFigure}) {
      CHECK(std::any_of(lex.indicators.begin(), lex.indicators.end(), [&](auto &kv) { return kv.second == ind; }));
    }
  }
  CHECK_THROWS_AS(lexicon().of(Language::kMixed), UnsupportedLanguage);
  auto partial = SpatialLexicon::parse_language("[indicators:orientation]\nsud\n");
  CHECK_THROWS_AS(SpatialLexicon(partial, partial), ResourceError);
  CHECK_THROWS_AS(SpatialLexicon::parse_language("sud\n"), ResourceError);
  CHECK_THROWS_AS(SpatialLexicon::parse_language("[indicators:upward]\n"), ResourceError);
  CHECK_THROWS_AS(SpatialLexicon::parse_language("[colors]\n"), ResourceError);
}

TEST_CASE("reference examples of spatial entities") {
  SUBCASE("au sud du Bénin is a relative entity") {
    auto anns = extract("Les rendements ont baissé au sud du Bénin depuis 1990.", Language::kFr);
    REQUIRE(anns.size() == 1);
    CHECK(anns[0].surface_text == "au sud du Bénin");
    CHECK(anns[0].kind == SpatialKind::kESR);
    CHECK(anns[0].indicator == Indicator::kOrientation);
    REQUIRE(anns[0].anchor);
    CHECK(anns[0].anchor->surface_text == "Bénin");
    CHECK(anns[0].span.contains(anns[0].anchor->span));
    CHECK(anns[0].span != anns[0].anchor->span);
  }
  SUBCASE("golfe de Guinée") {
    auto anns = extract("La pêche dans le golfe de Guinée reste artisanale.", Language::kFr);
    REQUIRE(anns.size() == 1);
    CHECK(anns[0].surface_text == "golfe de Guinée");
    CHECK(anns[0].kind == SpatialKind::kESA);
    CHECK(anns[0].feature_noun == "golfe");
    CHECK_FALSE(anns[0].indicator);
  }
  SUBCASE("Wujiang River Basin") {
    auto anns = extract("Soil erosion in the Wujiang River Basin was assessed.", Language::kEn);
    REQUIRE(anns.size() == 1);
    CHECK(anns[0].surface_text == "Wujiang River Basin");
    CHECK(anns[0].kind == SpatialKind::kESA);
  }
  SUBCASE("Near Paris") {
    auto anns = extract("Near Paris, peri-urban farms are shrinking.", Language::kEn);
    REQUIRE(anns.size() == 1);
    CHECK(anns[0].surface_text == "Near Paris");
    CHECK(anns[0].kind == SpatialKind::kESR);
    CHECK(anns[0].indicator == Indicator::kDistance);
    CHECK(anns[0].anchor->surface_text == "Paris");
  }
  SUBCASE("lac Eyre and Indian Ocean") {
    auto anns = annotate_spatial(
        doc("Le niveau du lac Eyre dépend des pluies. Moisture comes from the Indian Ocean in summer.", Language::kMixed),
        gazetteer(), lexicon());
    REQUIRE(anns.size() == 2);
    CHECK(anns[0].surface_text == "lac Eyre");
    CHECK(anns[1].surface_text == "Indian Ocean");
    for (const auto &a : anns) {
      CHECK(a.kind == SpatialKind::kESA);
      REQUIRE(a.resolution);
      CHECK(a.resolution->feature_class == FeatureClass::kHydrographic);
    }
  }
}

TEST_CASE("grammar details") {
  SUBCASE("feature noun with elided connector") {
    auto anns = extract("Sur le plateau d'Allada, les sols sont ferrallitiques.", Language::kFr);
    REQUIRE(anns.size() == 1);
    CHECK(anns[0].surface_text == "plateau d'Allada");
    CHECK(anns[0].feature_noun == "plateau");
  }
  SUBCASE("feature noun without connector") {
    auto anns = extract("Le fleuve Sénégal traverse quatre pays.", Language::kFr);
    REQUIRE(anns.size() == 1);
    CHECK(anns[0].surface_text == "fleuve Sénégal");
  }
  SUBCASE("English leading feature noun") {
    auto anns = extract("Fishing in the Gulf of Guinea and around Lake Victoria.", Language::kEn);
    REQUIRE(anns.size() == 2);
    CHECK(anns[0].surface_text == "Gulf of Guinea");
    CHECK(anns[1].surface_text == "Lake Victoria");
  }
  SUBCASE("multiword gazetteer names") {
    auto anns = extract("Les marchés d'Afrique de l'Ouest et la Côte d'Ivoire.", Language::kFr);
    REQUIRE(anns.size() == 2);
    CHECK(anns[0].surface_text == "Afrique de l'Ouest");
    CHECK(anns[1].surface_text == "Côte d'Ivoire");
  }
  SUBCASE("bare names need the gazetteer") {
    CHECK(extract("Les travaux de Dupont à Dakar.", Language::kFr).size() == 1);
    CHECK(extract("Selon Dupont, le climat change.", Language::kFr).empty());
  }
  SUBCASE("sentence-initial capital is not a name") {
    auto anns = extract("Rainfall Madagascar data were used.", Language::kEn);
    REQUIRE(anns.size() == 1);
    CHECK(anns[0].surface_text == "Madagascar");
  }
  SUBCASE("institution names are not places") {
    CHECK(extract("Une équipe de l'Université de Montpellier.", Language::kFr).empty());
    CHECK(extract("A team from Montpellier University.", Language::kEn).empty());
  }
  SUBCASE("widest indicator wins") {
    auto anns = extract("Farms in the north of Senegal.", Language::kEn);
    REQUIRE(anns.size() == 1);
    CHECK(anns[0].surface_text == "in the north of Senegal");
    CHECK(anns[0].indicator == Indicator::kOrientation);
  }
  SUBCASE("distance with a number") {
    auto anns = extract("Un site situé à 30 km de Dakar.", Language::kFr);
    REQUIRE(anns.size() == 1);
    CHECK(anns[0].surface_text == "30 km de Dakar");
    CHECK(anns[0].indicator == Indicator::kDistance);
  }
  SUBCASE("geometric figure between two entities keeps the first anchor") {
    auto anns = extract("La zone entre Dakar et Saint-Louis est aride.", Language::kFr);
    REQUIRE(anns.size() == 2);
    CHECK(anns[0].surface_text == "entre Dakar et Saint-Louis");
    CHECK(anns[0].indicator == Indicator::kGeometricFigure);
    CHECK(anns[0].anchor->surface_text == "Dakar");
    CHECK(anns[1].surface_text == "Saint-Louis");
    CHECK(anns[1].kind == SpatialKind::kESA);
  }
  SUBCASE("other indicator categories") {
    auto a = extract("Les villages le long du fleuve Niger.", Language::kFr);
    REQUIRE(a.size() == 1);
    CHECK(a[0].surface_text == "le long du fleuve Niger");
    CHECK(a[0].indicator == Indicator::kAdjacency);
    CHECK(a[0].anchor->feature_noun == "fleuve");
    auto b = extract("Plots within Queensland were sampled.", Language::kEn);
    REQUIRE(b.size() == 1);
    CHECK(b[0].indicator == Indicator::kInclusion);
  }
  SUBCASE("unsupported language") {
    CHECK_THROWS_AS(extract("Dakar", Language::kUnknown), UnsupportedLanguage);
  }
  SUBCASE("offsets are code points") {
    std::string text = "Étés chauds à l'ouest de Hanoï.";
    auto anns = extract(text, Language::kFr);
    REQUIRE(anns.size() == 1);
    CHECK(anns[0].surface_text == "à l'ouest de Hanoï");
    CHECK(substr_cp(text, anns[0].span.start, anns[0].span.end) == anns[0].surface_text);
  }
}

TEST_CASE("organization filter") {
  std::string text = "Madagascar announces a plan. The plateau d'Allada lies west of Cotonou.";
  auto cands = extract(text, Language::kEn);
  auto result = filter_organizations(cands, text, Language::kEn, lexicon());
  REQUIRE(result.organizations.size() == 1);
  CHECK(result.organizations[0].surface_text == "Madagascar");
  CHECK(find_surface(result.kept, "plateau d'Allada") == nullptr);  // not an English pattern
  CHECK(find_surface(result.kept, "west of Cotonou") != nullptr);

  std::string fr = "Le Sénégal a officiellement annoncé un plan. Le plateau d'Allada est fertile.";
  auto fr_result = filter_organizations(extract(fr, Language::kFr), fr, Language::kFr, lexicon());
  REQUIRE(fr_result.organizations.size() == 1);
  CHECK(fr_result.organizations[0].surface_text == "Sénégal");
  REQUIRE(fr_result.kept.size() == 1);
  CHECK(fr_result.kept[0].surface_text == "plateau d'Allada");

  // Verbs further than three tokens away, or past punctuation, do not count.
  std::string far = "Dakar, the capital, announced nothing. Dakar is a big city that announced it.";
  auto far_result = filter_organizations(extract(far, Language::kEn), far, Language::kEn, lexicon());
  CHECK(far_result.organizations.empty());
  CHECK(far_result.kept.size() == 2);

  CHECK(filter_organizations({}, text, Language::kEn, lexicon()).kept.empty());
}

TEST_CASE("disambiguation") {
  Resolver resolver(gazetteer(), lexicon());
  SUBCASE("fleuve Sénégal resolves to the river") {
    auto anns = annotate_spatial(doc("Le débit du fleuve Sénégal a diminué.", Language::kFr), gazetteer(), lexicon());
    REQUIRE(anns.size() == 1);
    REQUIRE(anns[0].resolution);
    CHECK(anns[0].resolution->gazetteer_id == "senegal-river");
    CHECK(anns[0].resolution->feature_class == FeatureClass::kHydrographic);
    // The bare name alone prefers the populous country.
    CHECK(resolver.resolve(esa("Sénégal"), {})->gazetteer_id == "sn");
  }
  SUBCASE("Bayonne follows the French context") {
    auto anns = annotate_spatial(
        doc("Des enquêtes menées à Toulouse, à Biarritz et à Bayonne montrent une hausse.", Language::kFr),
        gazetteer(), lexicon());
    REQUIRE(anns.size() == 3);
    CHECK(anns[2].surface_text == "Bayonne");
    REQUIRE(anns[2].resolution);
    CHECK(anns[2].resolution->gazetteer_id == "bayonne-fr");
    CHECK(anns[2].resolution->country_code == "FR");
    // Without context the larger American town wins on population.
    CHECK(resolver.resolve(esa("Bayonne"), {})->gazetteer_id == "bayonne-us");
    // An American context keeps it there.
    CHECK(resolver.resolve(esa("Bayonne"), {resolved_in("US")})->gazetteer_id == "bayonne-us");
  }
  SUBCASE("unknown names stay unresolved") {
    CHECK_FALSE(resolver.resolve(esa("Atlantis"), {}));
    auto anns = annotate_spatial(doc("Le fleuve Zorglub déborde.", Language::kFr), gazetteer(), lexicon());
    REQUIRE(anns.size() == 1);
    CHECK_FALSE(anns[0].resolution);
  }
  SUBCASE("candidate names strip the feature noun") {
    CHECK(resolver.candidate_names(esa("golfe de Guinée", "golfe")) ==
          std::vector<std::string>{"golfe de Guinée", "Guinée"});
    CHECK(resolver.candidate_names(esa("Wujiang River Basin", "Basin")) ==
          std::vector<std::string>{"Wujiang River Basin", "Wujiang River"});
    CHECK(resolver.resolve(esa("Wujiang River Basin", "Basin"), {})->gazetteer_id == "wujiang");
  }
  SUBCASE("score breakdown") {
    auto scored = resolver.score(esa("fleuve Sénégal", "fleuve"), {});
    REQUIRE(scored.size() == 2);
    CHECK(scored[0].score == doctest::Approx(0.5));
    double log_max = std::log1p(static_cast<double>(gazetteer().max_population()));
    CHECK(scored[1].score == doctest::Approx(0.2 * std::log1p(15854360.0) / log_max));
    CHECK(Resolver::modal_country({resolved_in("US"), resolved_in("FR")}) == "FR");
    CHECK(Resolver::modal_country({resolved_in("US"), resolved_in("FR"), resolved_in("US")}) == "US");
    CHECK(Resolver::modal_country({}).empty());
  }
}

TEST_CASE("resolution properties") {
  Resolver resolver(gazetteer(), lexicon());
  std::mt19937 rng(7);
  std::vector<std::string> names;
  for (const auto &e : gazetteer().entries()) {
    for (const auto &n : e.names) names.push_back(n.name);
  }
  const std::vector<std::string> nouns = {"", "fleuve", "lac", "ville", "plateau", "region", "river"};
  const std::vector<std::string> countries = {"FR", "US", "BJ", "SN", "CN", "AU", ""};
  for (int iter = 0; iter < 500; ++iter) {
    std::string name = names[rng() % names.size()];
    std::string noun = nouns[rng() % nouns.size()];
    SpatialAnnotation c = noun.empty() ? esa(name) : esa(noun + " " + name, noun);
    std::vector<SpatialAnnotation> context;
    for (int k = rng() % 4; k > 0; --k) context.push_back(resolved_in(countries[rng() % countries.size()]));

    auto r = resolver.resolve(c, context);
    REQUIRE(r);
    const GazetteerEntry *e = gazetteer().find(r->gazetteer_id);
    bool named = false;
    for (const auto &candidate : resolver.candidate_names(c)) {
      for (const auto &n : e->names) named = named || phrase_key(n.name) == phrase_key(candidate);
    }
    CHECK(named);
    CHECK(r->score >= 0);
    CHECK(r->score <= 1);

    // Adding context in a country never lowers the score of entries there.
    auto before = resolver.score(c, context);
    for (const auto &s : before) {
      auto extended = context;
      extended.push_back(resolved_in(s.entry->country_code));
      auto after = resolver.score(c, extended);
      auto it = std::find_if(after.begin(), after.end(), [&](const ScoredEntry &x) { return x.entry == s.entry; });
      REQUIRE(it != after.end());
      CHECK(it->score >= s.score - 1e-12);
    }
  }
}

TEST_CASE("annotation is deterministic and well-formed") {
  const std::vector<std::string> pieces = {
      "au sud du Bénin", "le golfe de Guinée", "near Paris", "the Wujiang River Basin", "à Bayonne", "Dakar",
      "entre Dakar et Saint-Louis", "le fleuve Sénégal", "Madagascar announces", "Les", "rendements", "in",
      "the", ",", ".", "l'Université de Montpellier", "à l'est de Cotonou", "Lake Eyre", "30 km from Nairobi"};
  std::mt19937 rng(11);
  for (int iter = 0; iter < 300; ++iter) {
    std::string text;
    for (int k = 3 + rng() % 12; k > 0; --k) text += pieces[rng() % pieces.size()] + " ";
    for (Language l : {Language::kFr, Language::kEn, Language::kMixed}) {
      auto a = annotate_spatial(doc(text, l), gazetteer(), lexicon());
      CHECK(a == annotate_spatial(doc(text, l), gazetteer(), lexicon()));
      for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(substr_cp(text, a[i].span.start, a[i].span.end) == a[i].surface_text);
        if (i > 0) CHECK(a[i - 1].span < a[i].span);
        if (a[i].kind == SpatialKind::kESR) {
          REQUIRE(a[i].anchor);
          CHECK(a[i].indicator);
          CHECK(a[i].span.contains(a[i].anchor->span));
          CHECK(a[i].span.length() > a[i].anchor->span.length());
        } else {
          CHECK_FALSE(a[i].indicator);
        }
      }
    }
  }
  CHECK(annotate_spatial(doc("", Language::kFr), gazetteer(), lexicon()).empty());
}
