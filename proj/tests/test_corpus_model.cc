#include "doctest.h"

#include <fstream>
#include <sstream>

#include "geoscope/corpus_model.h"
#include "geoscope/error.h"
#include "support/random_docs.h"

using namespace geoscope;

namespace {

std::string read_fixture(const std::string &rel) {
  std::ifstream in(std::string(GEOSCOPE_SOURCE_DIR) + "/fixtures/" + rel);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

DocumentRecord base_record(std::string abstract) {
  DocumentRecord r;
  r.doc_id = "istex-42";
  r.source = Source::kIstex;
  r.language = Language::kFr;
  r.title = "Climat";
  r.abstract = std::move(abstract);
  return r;
}

// Field-by-field structural comparison, reported per field so a failure
// names what diverged.
void check_field_equal(const AnnotatedDocument &a, const AnnotatedDocument &b) {
  CHECK(a.record.doc_id == b.record.doc_id);
  CHECK(a.record.source == b.record.source);
  CHECK(a.record.language == b.record.language);
  CHECK(a.record.title == b.record.title);
  CHECK(a.record.abstract == b.record.abstract);
  CHECK(a.record.creation_date == b.record.creation_date);
  CHECK(a.record.extra_metadata == b.record.extra_metadata);
  REQUIRE(a.spatial.size() == b.spatial.size());
  for (std::size_t i = 0; i < a.spatial.size(); ++i) {
    const auto &x = a.spatial[i];
    const auto &y = b.spatial[i];
    CHECK(x.span == y.span);
    CHECK(x.surface_text == y.surface_text);
    CHECK(x.kind == y.kind);
    CHECK(x.indicator == y.indicator);
    CHECK(x.feature_noun == y.feature_noun);
    CHECK(x.anchor == y.anchor);
    CHECK(x.resolution.has_value() == y.resolution.has_value());
    if (x.resolution && y.resolution) {
      CHECK(x.resolution->gazetteer_id == y.resolution->gazetteer_id);
      CHECK(x.resolution->canonical_name == y.resolution->canonical_name);
      CHECK(x.resolution->latitude == y.resolution->latitude);
      CHECK(x.resolution->longitude == y.resolution->longitude);
      CHECK(x.resolution->feature_class == y.resolution->feature_class);
      CHECK(x.resolution->country_code == y.resolution->country_code);
      CHECK(x.resolution->score == y.resolution->score);
    }
  }
  REQUIRE(a.temporal.size() == b.temporal.size());
  for (std::size_t i = 0; i < a.temporal.size(); ++i) {
    CHECK(a.temporal[i].span == b.temporal[i].span);
    CHECK(a.temporal[i].surface_text == b.temporal[i].surface_text);
    CHECK(a.temporal[i].timex_class == b.temporal[i].timex_class);
    CHECK(a.temporal[i].value_begin == b.temporal[i].value_begin);
    CHECK(a.temporal[i].value_end == b.temporal[i].value_end);
  }
  REQUIRE(a.thematic.size() == b.thematic.size());
  for (std::size_t i = 0; i < a.thematic.size(); ++i) {
    CHECK(a.thematic[i].span == b.thematic[i].span);
    CHECK(a.thematic[i].surface_text == b.thematic[i].surface_text);
    CHECK(a.thematic[i].concept_uri == b.thematic[i].concept_uri);
    CHECK(a.thematic[i].pref_label == b.thematic[i].pref_label);
    CHECK(a.thematic[i].used_for == b.thematic[i].used_for);
    CHECK(a.thematic[i].broader == b.thematic[i].broader);
  }
}

AnnotatedDocument three_annotation_fixture() {
  DocumentRecord r = base_record("Dans le golfe de Guinée, entre 1990 et 2000, le changement climatique a modifié la pêche.");
  r.creation_date = PartialDate::of(2017, 1, 3);
  r.extra_metadata = {{"name/namePart", "Kergosien, Eric"}, {"subject/topic", "pêche"}};
  SpatialAnnotation esa;
  esa.span = {8, 23};
  esa.surface_text = "golfe de Guinée";
  esa.feature_noun = "golfe";
  esa.resolution = GazetteerResolution{"2373775", "Gulf of Guinea", 0.5, 2.0, FeatureClass::kHydrographic, "", 0.83};
  TemporalAnnotation period{{25, 43}, "entre 1990 et 2000", TimexClass::kPeriod, PartialDate::of(1990), PartialDate::of(2000)};
  ThematicAnnotation topic{{48, 69}, "changement climatique", "http://aims.fao.org/aos/agrovoc/c_1666314",
                           "changement climatique", {"évolution du climat"},
                           {{"http://aims.fao.org/aos/agrovoc/c_1374571", "environnement"}}};
  return AnnotatedDocument::create(r, {esa}, {period}, {topic});
}

}  // namespace

TEST_CASE("document with zero annotations has three empty containers") {
  auto doc = AnnotatedDocument::create(base_record("Un résumé."), {}, {}, {});
  std::string xml = serialize_mods_ti(doc);
  CHECK(xml.find("<spatialAnnotations>\n  </spatialAnnotations>") != std::string::npos);
  CHECK(xml.find("<temporalAnnotations>\n  </temporalAnnotations>") != std::string::npos);
  CHECK(xml.find("<thematicAnnotations>\n  </thematicAnnotations>") != std::string::npos);
  CHECK_NOTHROW(validate_mods_ti(xml));
  CHECK(parse_mods_ti(xml) == doc);
}

TEST_CASE("ESA golfe de Guinee serializes as an es element with its text") {
  auto doc = three_annotation_fixture();
  std::string xml = serialize_mods_ti(doc);
  CHECK(xml.find("<es start=\"8\" end=\"23\" kind=\"ESA\" featureNoun=\"golfe\" geonameId=\"2373775\"") != std::string::npos);
  CHECK(xml.find("<text>golfe de Guinée</text>") != std::string::npos);
  CHECK(xml.find("featureClass=\"hydrographic\"") != std::string::npos);
  CHECK(xml.find("<timex3 tid=\"t1\" start=\"25\" end=\"43\" type=\"PERIOD\" value=\"1990\" endValue=\"2000\">") != std::string::npos);
  CHECK(xml.find("<broader uri=\"http://aims.fao.org/aos/agrovoc/c_1374571\">environnement</broader>") != std::string::npos);
  CHECK_NOTHROW(validate_mods_ti(xml));
}

TEST_CASE("three-annotation fixture round-trips field by field") {
  auto doc = three_annotation_fixture();
  check_field_equal(parse_mods_ti(serialize_mods_ti(doc)), doc);
}

TEST_CASE("hand-written period fixture parses") {
  auto doc = parse_mods_ti(read_fixture("mods_ti/period.xml"));
  CHECK(doc.record.doc_id == "agritrop-0001");
  CHECK(doc.record.source == Source::kAgritrop);
  CHECK(doc.record.creation_date == PartialDate::of(2004, 6, 15));
  CHECK(doc.record.extra_metadata ==
        MetadataPairs{{"originInfo/publisher", "CIRAD"}, {"name/namePart", "Dupont, Marie"}});
  REQUIRE(doc.temporal.size() == 1);
  CHECK(doc.temporal[0].timex_class == TimexClass::kPeriod);
  CHECK(doc.temporal[0].value_begin == PartialDate::of(1990));
  CHECK(doc.temporal[0].value_end == PartialDate::of(2000));
  REQUIRE(doc.spatial.size() == 1);
  CHECK(doc.spatial[0].kind == SpatialKind::kESR);
  CHECK(doc.spatial[0].anchor->surface_text == "Bénin");
  // Unknown MODS elements survive a second trip through extension metadata.
  CHECK(parse_mods_ti(serialize_mods_ti(doc)) == doc);
}

TEST_CASE("es without text is a DTD violation") {
  std::string xml = serialize_mods_ti(three_annotation_fixture());
  auto pos = xml.find("<text>golfe de Guinée</text>");
  xml.erase(pos, std::string("<text>golfe de Guinée</text>").size());
  CHECK_THROWS_AS(parse_mods_ti(xml), DtdViolation);
}

TEST_CASE("span outside the abstract is an invariant violation") {
  std::string xml = serialize_mods_ti(three_annotation_fixture());
  auto pos = xml.find("start=\"8\" end=\"23\"");
  xml.replace(pos, std::string("start=\"8\" end=\"23\"").size(), "start=\"800\" end=\"815\"");
  CHECK_THROWS_AS(parse_mods_ti(xml), InvariantViolation);
}

TEST_CASE("parse errors") {
  CHECK_THROWS_AS(parse_mods_ti("<mods><titleInfo>"), MalformedXml);
  CHECK_THROWS_AS(parse_mods_ti("<record/>"), DtdViolation);
}

TEST_CASE("construction rejects broken invariants") {
  DocumentRecord r = base_record("au sud du Bénin");
  SpatialAnnotation esr;
  esr.span = {0, 15};
  esr.surface_text = "au sud du Bénin";
  esr.kind = SpatialKind::kESR;
  esr.indicator = Indicator::kOrientation;
  CHECK_THROWS_AS(AnnotatedDocument::create(r, {esr}, {}, {}), InvariantViolation);  // no anchor
  esr.anchor = AnchorRef{{10, 15}, "Bénin", std::nullopt};
  CHECK_NOTHROW(AnnotatedDocument::create(r, {esr}, {}, {}));
  CHECK_THROWS_AS(AnnotatedDocument::create(r, {esr, esr}, {}, {}), InvariantViolation);  // duplicate span

  SpatialAnnotation esa;
  esa.span = {10, 15};
  esa.surface_text = "Benin";  // differs from the abstract
  CHECK_THROWS_AS(AnnotatedDocument::create(r, {esa}, {}, {}), InvariantViolation);

  TemporalAnnotation backwards{{0, 2}, "au", TimexClass::kPeriod, PartialDate::of(2000), PartialDate::of(1990)};
  CHECK_THROWS_AS(AnnotatedDocument::create(r, {}, {backwards}, {}), InvariantViolation);
  TemporalAnnotation date_with_end{{0, 2}, "au", TimexClass::kDate, PartialDate::of(2000), PartialDate::of(2001)};
  CHECK_THROWS_AS(AnnotatedDocument::create(r, {}, {date_with_end}, {}), InvariantViolation);

  ThematicAnnotation cyclic{{3, 6}, "sud", "u:1", "sud", {}, {{"u:2", "a"}, {"u:1", "b"}}};
  CHECK_THROWS_AS(AnnotatedDocument::create(r, {}, {}, {cyclic}), InvariantViolation);
  ThematicAnnotation mismatch{{3, 6}, "sud", "u:1", "nord", {}, {}};
  CHECK_THROWS_AS(AnnotatedDocument::create(r, {}, {}, {mismatch}), InvariantViolation);
}

TEST_CASE("repeated mentions at different offsets are kept") {
  DocumentRecord r = base_record("Bénin et Bénin");
  SpatialAnnotation a{{0, 5}, "Bénin"};
  SpatialAnnotation b{{9, 14}, "Bénin"};
  auto doc = AnnotatedDocument::create(r, {b, a}, {}, {});
  REQUIRE(doc.spatial.size() == 2);
  CHECK(doc.spatial[0].span.start == 0);
}

TEST_CASE("property: serialize then parse is field-equal and DTD-valid") {
  testing::RandomDocs gen(20240611);
  for (int i = 0; i < 300; ++i) {
    AnnotatedDocument doc = gen.document();
    std::string xml = serialize_mods_ti(doc);
    REQUIRE_NOTHROW(validate_mods_ti(xml));
    AnnotatedDocument back = parse_mods_ti(xml);
    check_field_equal(back, doc);
    REQUIRE(back == doc);
  }
}

TEST_CASE("shipped schema files are embedded") {
  CHECK(schema_text("spatialAnnotations.dtd").find("<!ELEMENT es (text)>") != std::string_view::npos);
  CHECK(schema_text("temporalAnnotations.dtd").find("timex3") != std::string_view::npos);
  CHECK(schema_text("thematicAnnotations.dtd").find("topic") != std::string_view::npos);
  CHECK(schema_text("nope.dtd").empty());
}

TEST_CASE("MODS-TI collection round trip") {
  geoscope::testing::RandomDocs gen(31);
  for (int iter = 0; iter < 50; ++iter) {
    std::vector<AnnotatedDocument> docs;
    for (int k = gen.uniform(0, 5); k > 0; --k) docs.push_back(gen.document());
    std::string xml = serialize_mods_ti_collection(docs);
    CHECK_NOTHROW(validate_mods_ti_collection(xml));
    CHECK(parse_mods_ti_collection(xml) == docs);
  }
  CHECK_THROWS_AS(validate_mods_ti_collection(serialize_mods_ti(geoscope::testing::RandomDocs(1).document())),
                  DtdViolation);
  CHECK_THROWS_AS(validate_mods_ti_collection("<modsCollection xmlns=\"http://www.loc.gov/mods/v3\"><note/></modsCollection>"),
                  DtdViolation);
}
