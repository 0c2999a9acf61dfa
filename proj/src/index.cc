#include "geoscope/index.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <map>
#include <set>

#include "json.hpp"

#include "geoscope/error.h"
#include "geoscope/spatial.h"
#include "geoscope/text.h"
#include "geoscope/thematic.h"

namespace geoscope {

using nlohmann::json;

namespace {

template <typename T>
void sort_unique(std::vector<T> &v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

std::vector<std::size_t> intersect(const std::vector<std::size_t> &a, const std::vector<std::size_t> &b) {
  std::vector<std::size_t> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

PartialDate date_field(const json &j, const char *key) {
  auto d = PartialDate::parse_iso(j.at(key).get<std::string>());
  if (!d) throw MalformedInput(std::string("bad date in '") + key + "'");
  return *d;
}

}  // namespace

IndexRecord make_index_record(const AnnotatedDocument &doc, std::vector<IndexTerm> terms, const Gazetteer *gazetteer) {
  IndexRecord r;
  r.doc_id = doc.record.doc_id;
  r.source = doc.record.source;
  r.language = doc.record.language;
  r.title = doc.record.title;
  r.terms = std::move(terms);

  for (const auto &a : doc.spatial) {
    if (!a.resolution) continue;
    IndexPlace p;
    p.canonical_name = a.resolution->canonical_name;
    p.country_code = a.resolution->country_code;
    p.lat = a.resolution->latitude;
    p.lon = a.resolution->longitude;
    p.kind = a.kind;
    p.gazetteer_id = a.resolution->gazetteer_id;
    if (gazetteer) {
      for (const auto *e : gazetteer->ancestors(p.gazetteer_id)) p.admin_path.push_back(e->gazetteer_id);
    }
    r.places.push_back(std::move(p));
  }

  std::optional<PartialDate> earliest;
  for (const auto &a : doc.temporal) {
    r.periods.push_back({a.value_begin, a.value_end.value_or(a.value_begin)});
    if (a.timex_class == TimexClass::kDate && (!earliest || compare_coarse(a.value_begin, *earliest) < 0)) {
      earliest = a.value_begin;
    }
  }
  if (earliest) {
    r.year = earliest->year;
  } else if (doc.record.creation_date) {
    r.year = doc.record.creation_date->year;
  }

  std::map<std::string, IndexConcept> concepts;
  for (const auto &a : doc.thematic) {
    IndexConcept &c = concepts[a.concept_uri];
    c.uri = a.concept_uri;
    if (c.tf == 0) c.label = a.pref_label;  // the direct label wins over an inherited one
    c.tf++;
    for (const auto &b : a.broader) {
      IndexConcept &p = concepts[b.uri];
      p.uri = b.uri;
      if (p.label.empty()) p.label = b.label;
      p.narrower_tf++;
    }
  }
  for (auto &[uri, c] : concepts) {
    c.inherited = c.tf == 0;
    r.concepts.push_back(std::move(c));
  }
  return r;
}

std::string to_json_line(const IndexRecord &r) {
  json j;
  j["doc_id"] = r.doc_id;
  j["source"] = to_string(r.source);
  j["language"] = to_string(r.language);
  j["title"] = r.title;
  j["year"] = r.year ? json(*r.year) : json(nullptr);
  j["places"] = json::array();
  for (const auto &p : r.places) {
    j["places"].push_back({{"canonical_name", p.canonical_name},
                           {"country_code", p.country_code},
                           {"lat", p.lat},
                           {"lon", p.lon},
                           {"kind", to_string(p.kind)},
                           {"gazetteer_id", p.gazetteer_id},
                           {"admin_path", p.admin_path}});
  }
  j["periods"] = json::array();
  for (const auto &p : r.periods) j["periods"].push_back({{"begin", p.begin.iso()}, {"end", p.end.iso()}});
  j["concepts"] = json::array();
  for (const auto &c : r.concepts) {
    j["concepts"].push_back({{"uri", c.uri},
                             {"label", c.label},
                             {"inherited", c.inherited},
                             {"tf", c.tf},
                             {"narrower_tf", c.narrower_tf}});
  }
  j["terms"] = json::array();
  for (const auto &t : r.terms) j["terms"].push_back({{"term", t.term}, {"c_value", t.c_value}});
  return j.dump();
}

IndexRecord index_record_from_json(std::string_view line) {
  try {
    json j = json::parse(line);
    IndexRecord r;
    r.doc_id = j.at("doc_id").get<std::string>();
    if (r.doc_id.empty()) throw MalformedInput("empty doc_id");
    r.source = source_from_string(j.at("source").get<std::string>());
    r.language = language_from_string(j.at("language").get<std::string>());
    r.title = j.at("title").get<std::string>();
    if (!j.at("year").is_null()) r.year = j.at("year").get<int>();
    for (const auto &p : j.at("places")) {
      IndexPlace place;
      place.canonical_name = p.at("canonical_name").get<std::string>();
      place.country_code = p.at("country_code").get<std::string>();
      place.lat = p.at("lat").get<double>();
      place.lon = p.at("lon").get<double>();
      std::string kind = p.at("kind").get<std::string>();
      if (kind != "ESA" && kind != "ESR") throw MalformedInput("bad place kind '" + kind + "'");
      place.kind = kind == "ESA" ? SpatialKind::kESA : SpatialKind::kESR;
      place.gazetteer_id = p.value("gazetteer_id", "");
      place.admin_path = p.value("admin_path", std::vector<std::string>{});
      r.places.push_back(std::move(place));
    }
    for (const auto &p : j.at("periods")) r.periods.push_back({date_field(p, "begin"), date_field(p, "end")});
    for (const auto &c : j.at("concepts")) {
      r.concepts.push_back({c.at("uri").get<std::string>(), c.at("label").get<std::string>(),
                            c.value("inherited", false), c.value("tf", std::size_t{0}),
                            c.value("narrower_tf", std::size_t{0})});
    }
    for (const auto &t : j.at("terms")) r.terms.push_back({t.at("term").get<std::string>(), t.at("c_value").get<double>()});
    return r;
  } catch (const json::exception &e) {
    throw MalformedInput(std::string("index record: ") + e.what());
  }
}

void write_index(std::ostream &out, const std::vector<IndexRecord> &records) {
  for (const auto &r : records) out << to_json_line(r) << '\n';
}

void write_index(const std::filesystem::path &path, const std::vector<IndexRecord> &records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ResourceError("cannot write " + path.string());
  write_index(out, records);
}

std::vector<IndexRecord> read_index(std::istream &in) {
  std::vector<IndexRecord> out;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(index_record_from_json(line));
    } catch (const MalformedInput &e) {
      throw MalformedInput("line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

std::vector<IndexRecord> read_index(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ResourceError("cannot read " + path.string());
  return read_index(in);
}

bool BoundingBox::valid() const {
  auto finite = std::isfinite(min_lat) && std::isfinite(max_lat) && std::isfinite(min_lon) && std::isfinite(max_lon);
  return finite && -90 <= min_lat && min_lat <= max_lat && max_lat <= 90 && -180 <= min_lon && min_lon <= max_lon &&
         max_lon <= 180;
}

bool BoundingBox::contains(double lat, double lon) const {
  return min_lat <= lat && lat <= max_lat && min_lon <= lon && lon <= max_lon;
}

SearchIndex::SearchIndex(std::vector<IndexRecord> records, const Gazetteer *gazetteer, const Thesaurus *thesaurus,
                         SearchWeights weights)
    : records_(std::move(records)), gazetteer_(gazetteer), thesaurus_(thesaurus), weights_(weights) {
  std::sort(records_.begin(), records_.end(), [](const auto &a, const auto &b) { return a.doc_id < b.doc_id; });
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const IndexRecord &r = records_[i];
    for (const auto &p : r.places) {
      by_place_name_[phrase_key(p.canonical_name)].push_back(i);
      if (!p.gazetteer_id.empty()) by_place_id_[p.gazetteer_id].push_back(i);
      for (const auto &a : p.admin_path) by_place_id_[a].push_back(i);
      points_.push_back({p.lat, p.lon, i});
    }
    for (const auto &p : r.periods) intervals_.push_back({p.begin, p.end, i});
    for (const auto &c : r.concepts) {
      if (!c.inherited) by_concept_[c.uri].push_back(i);
      by_concept_any_[c.uri].push_back(i);
      uris_by_label_[label_key(c.label)].push_back(c.uri);
    }
  }
  for (auto *m : {&by_place_name_, &by_place_id_, &by_concept_, &by_concept_any_}) {
    for (auto &[k, v] : *m) sort_unique(v);
  }
  for (auto &[k, v] : uris_by_label_) sort_unique(v);
}

SearchIndex::Postings SearchIndex::place_candidates(const PlaceClause &clause) const {
  Postings out;
  if (clause.bbox) {
    for (const auto &p : points_) {
      if (clause.bbox->contains(p.lat, p.lon)) out.push_back(p.record);
    }
    sort_unique(out);
    return out;
  }
  const std::string key = phrase_key(*clause.name);
  bool known = false;
  if (auto it = by_place_name_.find(key); it != by_place_name_.end()) {
    known = true;
    out = it->second;
  }
  if (gazetteer_) {
    for (const auto *e : gazetteer_->lookup(*clause.name)) {
      known = true;
      if (auto it = by_place_id_.find(e->gazetteer_id); it != by_place_id_.end()) {
        out.insert(out.end(), it->second.begin(), it->second.end());
      }
    }
  }
  if (!known) throw UnknownPlaceName("unknown place name '" + *clause.name + "'");
  sort_unique(out);
  return out;
}

SearchIndex::Postings SearchIndex::period_candidates(const PeriodClause &clause) const {
  Postings out;
  for (const auto &iv : intervals_) {
    if (clause.end && compare_coarse(iv.begin, *clause.end) > 0) continue;
    if (clause.begin && compare_coarse(*clause.begin, iv.end) > 0) continue;
    out.push_back(iv.record);
  }
  sort_unique(out);
  return out;
}

SearchIndex::Postings SearchIndex::concept_candidates(const ConceptClause &clause,
                                                      std::vector<std::string> &uris) const {
  const std::string &q = clause.uri_or_label;
  if (by_concept_any_.count(q) || (thesaurus_ && thesaurus_->find(q))) {
    uris.push_back(q);
  } else {
    const std::string key = label_key(q);
    if (thesaurus_) {
      for (const char *lang : {"fr", "en", ""}) {
        for (const auto *c : thesaurus_->lookup(key, lang)) uris.push_back(c->uri);
      }
    }
    if (auto it = uris_by_label_.find(key); it != uris_by_label_.end()) {
      uris.insert(uris.end(), it->second.begin(), it->second.end());
    }
    sort_unique(uris);
  }
  const auto &postings = clause.expand_broader ? by_concept_any_ : by_concept_;
  Postings out;
  for (const auto &u : uris) {
    if (auto it = postings.find(u); it != postings.end()) out.insert(out.end(), it->second.begin(), it->second.end());
  }
  sort_unique(out);
  return out;
}

std::vector<SearchHit> SearchIndex::search(const Query &query) const {
  if (!query.place && !query.period && !query.concept_clause) throw InvalidQuery("query has no clause");
  if (query.place) {
    if (query.place->name.has_value() == query.place->bbox.has_value()) {
      throw InvalidQuery("place clause needs exactly one of name and bounding box");
    }
    if (query.place->bbox && !query.place->bbox->valid()) throw InvalidQuery("invalid bounding box");
    if (query.place->name && phrase_key(*query.place->name).empty()) throw InvalidQuery("empty place name");
  }
  if (query.period) {
    const auto &p = *query.period;
    if (!p.begin && !p.end) throw InvalidQuery("period clause needs a bound");
    if ((p.begin && !p.begin->valid()) || (p.end && !p.end->valid())) throw InvalidQuery("invalid period bound");
    if (p.begin && p.end && compare_coarse(*p.begin, *p.end) > 0) throw InvalidQuery("period ends before it begins");
  }
  if (query.concept_clause && trim(query.concept_clause->uri_or_label).empty()) throw InvalidQuery("empty concept");

  std::optional<Postings> result;
  auto narrow = [&](Postings p) { result = result ? intersect(*result, p) : std::move(p); };
  double base = 0;
  if (query.place) {
    narrow(place_candidates(*query.place));
    base += weights_.place;
  }
  if (query.period) {
    narrow(period_candidates(*query.period));
    base += weights_.period;
  }
  std::vector<std::string> uris;
  if (query.concept_clause) {
    narrow(concept_candidates(*query.concept_clause, uris));
    base += weights_.thematic;
  }

  std::vector<SearchHit> hits;
  for (std::size_t i : *result) {
    double score = base;
    if (query.concept_clause) {
      std::size_t tf = 0;
      for (const auto &c : records_[i].concepts) {
        if (!std::binary_search(uris.begin(), uris.end(), c.uri)) continue;
        tf += c.tf + (query.concept_clause->expand_broader ? c.narrower_tf : 0);
      }
      score += weights_.term_bonus * static_cast<double>(tf);
    }
    hits.push_back({records_[i].doc_id, score});
  }
  std::sort(hits.begin(), hits.end(), [](const SearchHit &a, const SearchHit &b) {
    return a.score != b.score ? a.score > b.score : a.doc_id < b.doc_id;
  });
  return hits;
}

}  // namespace geoscope
