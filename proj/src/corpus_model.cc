#include "geoscope/corpus_model.h"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <set>

#include "geoscope/dtd.h"
#include "geoscope/error.h"
#include "geoscope/text.h"
#include "geoscope/xml.h"
#include "schemas_embedded.h"

namespace geoscope {

namespace {

constexpr std::array<std::pair<FeatureClass, const char *>, 7> kFeatureClasses = {{
    {FeatureClass::kPopulatedPlace, "populated_place"},
    {FeatureClass::kAdministrative, "administrative"},
    {FeatureClass::kHydrographic, "hydrographic"},
    {FeatureClass::kTerrain, "terrain"},
    {FeatureClass::kRegion, "region"},
    {FeatureClass::kCountry, "country"},
    {FeatureClass::kOther, "other"},
}};

constexpr std::array<std::pair<Indicator, const char *>, 5> kIndicators = {{
    {Indicator::kOrientation, "orientation"},
    {Indicator::kDistance, "distance"},
    {Indicator::kAdjacency, "adjacency"},
    {Indicator::kInclusion, "inclusion"},
    {Indicator::kGeometricFigure, "geometric_figure"},
}};

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

double parse_double(const std::string &s, const std::string &what) {
  double v = 0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size() || !std::isfinite(v)) {
    throw InvariantViolation(what + " is not a number: '" + s + "'");
  }
  return v;
}

std::size_t parse_offset(const std::string &s, const std::string &what) {
  std::size_t v = 0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size() || s.empty()) {
    throw InvariantViolation(what + " is not an offset: '" + s + "'");
  }
  return v;
}

void check_span(const Span &span, std::size_t abstract_length, const std::string &surface,
                const std::string &abstract, const std::string &what) {
  if (span.end <= span.start) {
    throw InvariantViolation(what + " has an empty or inverted span");
  }
  if (span.end > abstract_length) {
    throw InvariantViolation(what + " span [" + std::to_string(span.start) + "," +
                             std::to_string(span.end) + ") lies outside the abstract");
  }
  if (substr_cp(abstract, span.start, span.end) != surface) {
    throw InvariantViolation(what + " surface text '" + surface +
                             "' differs from the abstract at its span");
  }
}

template <typename T>
void check_sorted_unique(const std::vector<T> &list, const std::string &what) {
  for (std::size_t i = 1; i < list.size(); ++i) {
    if (list[i].span == list[i - 1].span) {
      throw InvariantViolation("duplicate " + what + " span [" + std::to_string(list[i].span.start) +
                               "," + std::to_string(list[i].span.end) + ")");
    }
    if (list[i].span < list[i - 1].span) throw InvariantViolation(what + " annotations are not sorted");
  }
}

template <typename T>
void sort_by_span(std::vector<T> &list) {
  std::stable_sort(list.begin(), list.end(), [](const T &a, const T &b) { return a.span < b.span; });
}

std::string required_attr(const xml::Node &node, std::string_view name) {
  auto v = node.attr(name);
  if (!v) throw DtdViolation("<" + node.name + "> lacks attribute '" + std::string(name) + "'");
  return *v;
}

std::string text_child(const xml::Node &node) {
  const xml::Node *t = node.child("text");
  if (!t) throw DtdViolation("<" + node.name + "> lacks its <text> child");
  return t->text;
}

// Appends every non-empty leaf under `node` as (path, text).
void flatten_leaves(const xml::Node &node, const std::string &prefix, MetadataPairs &out) {
  std::string path = prefix.empty() ? node.name : prefix + "/" + node.name;
  if (node.is_leaf()) {
    if (!trim(node.text).empty()) out.emplace_back(path, node.text);
    return;
  }
  for (const auto &c : node.children) flatten_leaves(c, path, out);
}

}  // namespace

std::string to_string(Source source) {
  switch (source) {
    case Source::kIstex: return "istex";
    case Source::kAgritrop: return "agritrop";
    case Source::kAnrt: return "anrt";
    case Source::kOther: return "other";
  }
  return "other";
}

std::string to_string(Language language) {
  switch (language) {
    case Language::kFr: return "fr";
    case Language::kEn: return "en";
    case Language::kMixed: return "mixed";
    case Language::kUnknown: return "unknown";
  }
  return "unknown";
}

Source source_from_string(std::string_view s) {
  std::string f = fold(trim(s));
  if (f == "istex") return Source::kIstex;
  if (f == "agritrop" || f == "cirad") return Source::kAgritrop;
  if (f == "anrt" || f == "theses" || f == "these") return Source::kAnrt;
  return Source::kOther;
}

Language language_from_string(std::string_view s) {
  std::string f = fold(trim(s));
  if (f == "fr" || f == "fre" || f == "fra" || f == "french" || f == "francais") return Language::kFr;
  if (f == "en" || f == "eng" || f == "english" || f == "anglais") return Language::kEn;
  if (f == "mixed" || f == "mul") return Language::kMixed;
  return Language::kUnknown;
}

std::string to_string(FeatureClass c) {
  for (const auto &[value, name] : kFeatureClasses) {
    if (value == c) return name;
  }
  return "other";
}

std::string to_string(SpatialKind k) { return k == SpatialKind::kESA ? "ESA" : "ESR"; }

std::string to_string(Indicator i) {
  for (const auto &[value, name] : kIndicators) {
    if (value == i) return name;
  }
  return "";
}

std::optional<FeatureClass> feature_class_from_string(std::string_view s) {
  for (const auto &[value, name] : kFeatureClasses) {
    if (s == name) return value;
  }
  return std::nullopt;
}

std::optional<Indicator> indicator_from_string(std::string_view s) {
  for (const auto &[value, name] : kIndicators) {
    if (s == name) return value;
  }
  return std::nullopt;
}

std::string label_key(std::string_view text) {
  std::string key;
  for (const auto &tok : tokenize(fold(text))) {
    if (tok.type == TokenType::kPunct) continue;
    std::string w = tok.text;
    if (code_point_length(w) > 3 && (w.back() == 's' || w.back() == 'x')) w.pop_back();
    if (!key.empty()) key += ' ';
    key += w;
  }
  return key;
}

void check_invariants(const DocumentRecord &record) {
  if (record.doc_id.empty()) throw InvariantViolation("doc_id is empty");
  if (record.creation_date && !record.creation_date->valid()) {
    throw InvariantViolation("creation_date is not a valid Gregorian date");
  }
}

void check_invariants(const AnnotatedDocument &doc) {
  check_invariants(doc.record);
  const std::string &abstract = doc.record.abstract;
  const std::size_t length = code_point_length(abstract);

  for (const auto &a : doc.spatial) {
    std::string what = "spatial annotation '" + a.surface_text + "'";
    check_span(a.span, length, a.surface_text, abstract, what);
    if (a.kind == SpatialKind::kESR) {
      if (!a.indicator) throw InvariantViolation(what + ": ESR without indicator");
      if (!a.anchor) throw InvariantViolation(what + ": ESR without anchor ESA");
      if (!a.span.contains(a.anchor->span) || a.span == a.anchor->span) {
        throw InvariantViolation(what + ": ESR must strictly contain its anchor");
      }
      check_span(a.anchor->span, length, a.anchor->surface_text, abstract, what + " anchor");
    } else {
      if (a.indicator) throw InvariantViolation(what + ": ESA with an indicator");
      if (a.anchor) throw InvariantViolation(what + ": ESA with an anchor");
    }
    if (const auto &r = a.resolution) {
      if (r->latitude < -90 || r->latitude > 90) throw InvariantViolation(what + ": latitude out of range");
      if (r->longitude < -180 || r->longitude > 180) throw InvariantViolation(what + ": longitude out of range");
      if (r->score < 0 || r->score > 1) throw InvariantViolation(what + ": score outside [0,1]");
    }
  }
  check_sorted_unique(doc.spatial, "spatial");

  for (const auto &t : doc.temporal) {
    std::string what = "temporal annotation '" + t.surface_text + "'";
    check_span(t.span, length, t.surface_text, abstract, what);
    if (!t.value_begin.valid()) throw InvariantViolation(what + ": invalid value");
    if (t.timex_class == TimexClass::kDate) {
      if (t.value_end) throw InvariantViolation(what + ": date with an end value");
    } else {
      if (!t.value_end) throw InvariantViolation(what + ": period without an end value");
      if (!t.value_end->valid()) throw InvariantViolation(what + ": invalid end value");
      if (compare_coarse(t.value_begin, *t.value_end) > 0) {
        throw InvariantViolation(what + ": period begins after it ends");
      }
    }
  }
  check_sorted_unique(doc.temporal, "temporal");

  for (const auto &t : doc.thematic) {
    std::string what = "thematic annotation '" + t.surface_text + "'";
    check_span(t.span, length, t.surface_text, abstract, what);
    if (t.pref_label.empty()) throw InvariantViolation(what + ": empty pref_label");
    std::set<std::string> seen{t.concept_uri};
    for (const auto &b : t.broader) {
      if (!seen.insert(b.uri).second) throw InvariantViolation(what + ": cyclic broader chain at " + b.uri);
    }
    std::string key = label_key(t.surface_text);
    bool matches = key == label_key(t.pref_label) ||
                   std::any_of(t.used_for.begin(), t.used_for.end(),
                               [&](const std::string &l) { return label_key(l) == key; });
    if (!matches) throw InvariantViolation(what + ": surface matches no label of " + t.concept_uri);
  }
  check_sorted_unique(doc.thematic, "thematic");
}

AnnotatedDocument AnnotatedDocument::create(DocumentRecord record, std::vector<SpatialAnnotation> spatial,
                                            std::vector<TemporalAnnotation> temporal,
                                            std::vector<ThematicAnnotation> thematic) {
  AnnotatedDocument doc{std::move(record), std::move(spatial), std::move(temporal), std::move(thematic)};
  sort_by_span(doc.spatial);
  sort_by_span(doc.temporal);
  sort_by_span(doc.thematic);
  check_invariants(doc);
  return doc;
}

std::string_view schema_text(std::string_view file_name) {
  for (const auto &schema : embedded::kSchemas) {
    if (schema.name == file_name) return schema.text;
  }
  return {};
}

const Dtd &mods_ti_schema() {
  static const Dtd schema = [] {
    Dtd merged;
    for (const auto &s : embedded::kSchemas) merged.merge(Dtd::parse(s.text));
    return merged;
  }();
  return schema;
}

void validate_mods_ti(std::string_view xml_text) {
  xml::Document doc = xml::parse(xml_text);
  if (doc.root.name != "mods") throw DtdViolation("root element is <" + doc.root.name + ">, expected <mods>");
  mods_ti_schema().validate(doc.root);
}

namespace {

void write_mods(xml::Writer &w, const AnnotatedDocument &doc) {
  const DocumentRecord &r = doc.record;
  w.open("mods", {{"xmlns", std::string(kModsNamespace)}, {"version", "3.7"}});

  w.open("titleInfo");
  w.text_element("title", r.title);
  w.close();
  w.text_element("abstract", r.abstract);
  w.open("language");
  w.text_element("languageTerm", to_string(r.language), {{"type", "code"}, {"authority", "geoscope"}});
  w.close();
  if (r.creation_date) {
    w.open("originInfo");
    w.text_element("dateCreated", r.creation_date->iso(), {{"encoding", "w3cdtf"}});
    w.close();
  }
  w.open("recordInfo");
  w.text_element("recordContentSource", to_string(r.source));
  w.text_element("recordIdentifier", r.doc_id);
  w.close();
  if (!r.extra_metadata.empty()) {
    w.open("extension");
    for (const auto &[key, value] : r.extra_metadata) w.text_element("metadata", value, {{"key", key}});
    w.close();
  }

  w.open("spatialAnnotations");
  for (const auto &a : doc.spatial) {
    xml::Writer::Attrs attrs = {{"start", std::to_string(a.span.start)},
                                {"end", std::to_string(a.span.end)},
                                {"kind", to_string(a.kind)}};
    if (a.indicator) attrs.emplace_back("indicator", to_string(*a.indicator));
    if (a.feature_noun) attrs.emplace_back("featureNoun", *a.feature_noun);
    if (a.anchor) {
      attrs.emplace_back("anchorStart", std::to_string(a.anchor->span.start));
      attrs.emplace_back("anchorEnd", std::to_string(a.anchor->span.end));
      if (a.anchor->feature_noun) attrs.emplace_back("anchorFeatureNoun", *a.anchor->feature_noun);
    }
    if (const auto &res = a.resolution) {
      attrs.emplace_back("geonameId", res->gazetteer_id);
      attrs.emplace_back("name", res->canonical_name);
      attrs.emplace_back("lat", format_double(res->latitude));
      attrs.emplace_back("lon", format_double(res->longitude));
      attrs.emplace_back("featureClass", to_string(res->feature_class));
      attrs.emplace_back("countryCode", res->country_code);
      attrs.emplace_back("score", format_double(res->score));
    }
    w.open("es", attrs);
    w.text_element("text", a.surface_text);
    w.close();
  }
  w.close();

  w.open("temporalAnnotations");
  int tid = 0;
  for (const auto &t : doc.temporal) {
    xml::Writer::Attrs attrs = {{"tid", "t" + std::to_string(++tid)},
                                {"start", std::to_string(t.span.start)},
                                {"end", std::to_string(t.span.end)},
                                {"type", t.timex_class == TimexClass::kDate ? "DATE" : "PERIOD"},
                                {"value", t.value_begin.iso()}};
    if (t.value_end) attrs.emplace_back("endValue", t.value_end->iso());
    w.open("timex3", attrs);
    w.text_element("text", t.surface_text);
    w.close();
  }
  w.close();

  w.open("thematicAnnotations");
  for (const auto &t : doc.thematic) {
    w.open("topic", {{"start", std::to_string(t.span.start)},
                     {"end", std::to_string(t.span.end)},
                     {"uri", t.concept_uri},
                     {"prefLabel", t.pref_label}});
    w.text_element("text", t.surface_text);
    for (const auto &u : t.used_for) w.text_element("usedFor", u);
    for (const auto &b : t.broader) w.text_element("broader", b.label, {{"uri", b.uri}});
    w.close();
  }
  w.close();

  w.close();
}

AnnotatedDocument from_mods_node(const xml::Node &root);

}  // namespace

std::string serialize_mods_ti(const AnnotatedDocument &doc) {
  xml::Writer w;
  w.doctype("mods", kModsTiSystemId);
  write_mods(w, doc);
  return w.str();
}

std::string serialize_mods_ti_collection(const std::vector<AnnotatedDocument> &docs) {
  xml::Writer w;
  w.doctype("modsCollection", kModsTiSystemId);
  w.open("modsCollection", {{"xmlns", std::string(kModsNamespace)}});
  for (const auto &d : docs) write_mods(w, d);
  w.close();
  return w.str();
}

std::vector<AnnotatedDocument> parse_mods_ti_collection(std::string_view xml_text) {
  xml::Document parsed = xml::parse(xml_text);
  if (parsed.root.name != "modsCollection") {
    throw DtdViolation("root element is <" + parsed.root.name + ">, expected <modsCollection>");
  }
  mods_ti_schema().validate(parsed.root);
  std::vector<AnnotatedDocument> out;
  for (const auto &child : parsed.root.children) out.push_back(from_mods_node(child));
  return out;
}

void validate_mods_ti_collection(std::string_view xml_text) { parse_mods_ti_collection(xml_text); }

AnnotatedDocument parse_mods_ti(std::string_view xml_text) {
  xml::Document parsed = xml::parse(xml_text);
  return from_mods_node(parsed.root);
}

namespace {

AnnotatedDocument from_mods_node(const xml::Node &root) {
  if (root.name != "mods") throw DtdViolation("root element is <" + root.name + ">, expected <mods>");
  mods_ti_schema().validate(root);

  DocumentRecord record;
  MetadataPairs passthrough;
  MetadataPairs extension;
  bool have_title = false, have_abstract = false, have_language = false, have_date = false,
       have_id = false, have_source = false;

  for (const auto &child : root.children) {
    const std::string &n = child.name;
    if (n == "titleInfo" && !have_title) {
      have_title = true;
      for (const auto &part : child.children) {
        if (part.name == "title") {
          record.title = part.text;
        } else {
          flatten_leaves(part, n, passthrough);
        }
      }
    } else if (n == "abstract" && !have_abstract) {
      have_abstract = true;
      record.abstract = child.text;
    } else if (n == "language" && !have_language) {
      have_language = true;
      record.language = language_from_string(child.children.front().text);
      for (std::size_t i = 1; i < child.children.size(); ++i) flatten_leaves(child.children[i], n, passthrough);
    } else if (n == "originInfo") {
      for (const auto &part : child.children) {
        if (part.name == "dateCreated" && !have_date) {
          have_date = true;
          auto date = PartialDate::parse_iso(trim(part.text));
          if (!date) throw InvariantViolation("dateCreated '" + part.text + "' is not an ISO date");
          record.creation_date = date;
        } else {
          flatten_leaves(part, n, passthrough);
        }
      }
    } else if (n == "recordInfo") {
      for (const auto &part : child.children) {
        if (part.name == "recordIdentifier" && !have_id) {
          have_id = true;
          record.doc_id = part.text;
        } else if (part.name == "recordContentSource" && !have_source) {
          have_source = true;
          record.source = source_from_string(part.text);
        } else {
          flatten_leaves(part, n, passthrough);
        }
      }
    } else if (n == "extension") {
      for (const auto &m : child.children) extension.emplace_back(required_attr(m, "key"), m.text);
    } else if (n == "spatialAnnotations" || n == "temporalAnnotations" || n == "thematicAnnotations") {
      continue;
    } else {
      flatten_leaves(child, "", passthrough);
    }
  }
  if (!have_id) throw InvariantViolation("recordInfo/recordIdentifier (doc_id) is missing");
  record.extra_metadata = std::move(passthrough);
  record.extra_metadata.insert(record.extra_metadata.end(), extension.begin(), extension.end());

  std::vector<SpatialAnnotation> spatial;
  for (const xml::Node *es : root.child("spatialAnnotations")->children_named("es")) {
    SpatialAnnotation a;
    a.span = {parse_offset(required_attr(*es, "start"), "es start"), parse_offset(required_attr(*es, "end"), "es end")};
    a.surface_text = text_child(*es);
    a.kind = required_attr(*es, "kind") == "ESA" ? SpatialKind::kESA : SpatialKind::kESR;
    if (auto v = es->attr("indicator")) a.indicator = indicator_from_string(*v);
    a.feature_noun = es->attr("featureNoun");
    auto anchor_start = es->attr("anchorStart");
    auto anchor_end = es->attr("anchorEnd");
    if (anchor_start.has_value() != anchor_end.has_value()) {
      throw InvariantViolation("es anchorStart and anchorEnd must appear together");
    }
    if (anchor_start) {
      AnchorRef anchor;
      anchor.span = {parse_offset(*anchor_start, "anchorStart"), parse_offset(*anchor_end, "anchorEnd")};
      anchor.surface_text = substr_cp(record.abstract, anchor.span.start, anchor.span.end);
      anchor.feature_noun = es->attr("anchorFeatureNoun");
      a.anchor = std::move(anchor);
    }
    if (auto id = es->attr("geonameId")) {
      GazetteerResolution res;
      res.gazetteer_id = *id;
      auto need = [&](std::string_view attr) {
        auto v = es->attr(attr);
        if (!v) throw InvariantViolation("resolved es lacks '" + std::string(attr) + "'");
        return *v;
      };
      res.canonical_name = need("name");
      res.latitude = parse_double(need("lat"), "lat");
      res.longitude = parse_double(need("lon"), "lon");
      res.feature_class = *feature_class_from_string(need("featureClass"));
      res.country_code = need("countryCode");
      res.score = parse_double(need("score"), "score");
      a.resolution = std::move(res);
    }
    spatial.push_back(std::move(a));
  }

  std::vector<TemporalAnnotation> temporal;
  for (const xml::Node *tx : root.child("temporalAnnotations")->children_named("timex3")) {
    TemporalAnnotation t;
    t.span = {parse_offset(required_attr(*tx, "start"), "timex3 start"),
              parse_offset(required_attr(*tx, "end"), "timex3 end")};
    t.surface_text = text_child(*tx);
    t.timex_class = required_attr(*tx, "type") == "DATE" ? TimexClass::kDate : TimexClass::kPeriod;
    auto begin = PartialDate::parse_iso(required_attr(*tx, "value"));
    if (!begin) throw InvariantViolation("timex3 value '" + *tx->attr("value") + "' is not a partial ISO date");
    t.value_begin = *begin;
    if (auto e = tx->attr("endValue")) {
      auto end = PartialDate::parse_iso(*e);
      if (!end) throw InvariantViolation("timex3 endValue '" + *e + "' is not a partial ISO date");
      t.value_end = *end;
    }
    temporal.push_back(std::move(t));
  }

  std::vector<ThematicAnnotation> thematic;
  for (const xml::Node *topic : root.child("thematicAnnotations")->children_named("topic")) {
    ThematicAnnotation t;
    t.span = {parse_offset(required_attr(*topic, "start"), "topic start"),
              parse_offset(required_attr(*topic, "end"), "topic end")};
    t.surface_text = text_child(*topic);
    t.concept_uri = required_attr(*topic, "uri");
    t.pref_label = required_attr(*topic, "prefLabel");
    for (const xml::Node *u : topic->children_named("usedFor")) t.used_for.push_back(u->text);
    for (const xml::Node *b : topic->children_named("broader")) t.broader.push_back({required_attr(*b, "uri"), b->text});
    thematic.push_back(std::move(t));
  }

  // Lists are expected in span order already; create() re-sorts and checks.
  return AnnotatedDocument::create(std::move(record), std::move(spatial), std::move(temporal), std::move(thematic));
}

}  // namespace

}  // namespace geoscope
