#ifndef GEOSCOPE_TESTS_SUPPORT_SEARCH_ORACLE_H_
#define GEOSCOPE_TESTS_SUPPORT_SEARCH_ORACLE_H_

// Brute-force reference for SearchIndex::search and a generator of random
// index corpora and queries to compare the two on.

#include <algorithm>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "geoscope/error.h"
#include "geoscope/index.h"
#include "geoscope/spatial.h"
#include "support/random_docs.h"

namespace geoscope::testing {

// Straight scan of every record with the query semantics spelled out.
// Concept labels are resolved against the records only.
inline std::vector<SearchHit> brute_force_search(const std::vector<IndexRecord> &records, const Query &q,
                                                 const SearchWeights &w, const Gazetteer &gazetteer) {
  std::set<std::string> place_ids;
  std::string place_key;
  if (q.place && q.place->name) {
    place_key = phrase_key(*q.place->name);
    for (const auto *e : gazetteer.lookup(*q.place->name)) place_ids.insert(e->gazetteer_id);
    bool in_index = std::any_of(records.begin(), records.end(), [&](const IndexRecord &r) {
      return std::any_of(r.places.begin(), r.places.end(),
                         [&](const IndexPlace &p) { return phrase_key(p.canonical_name) == place_key; });
    });
    if (!in_index && place_ids.empty()) throw UnknownPlaceName("oracle");
  }
  std::set<std::string> uris;
  if (q.concept_clause) {
    const std::string &c = q.concept_clause->uri_or_label;
    for (const auto &r : records) {
      for (const auto &k : r.concepts) {
        if (k.uri == c) uris = {c};
      }
    }
    if (uris.empty()) {
      for (const auto &r : records) {
        for (const auto &k : r.concepts) {
          if (label_key(k.label) == label_key(c)) uris.insert(k.uri);
        }
      }
    }
  }
  std::vector<SearchHit> out;
  for (const auto &r : records) {
    double score = 0;
    if (q.place) {
      bool hit = false;
      for (const auto &p : r.places) {
        if (q.place->bbox) {
          const auto &b = *q.place->bbox;
          hit |= b.min_lat <= p.lat && p.lat <= b.max_lat && b.min_lon <= p.lon && p.lon <= b.max_lon;
        } else {
          hit |= phrase_key(p.canonical_name) == place_key || place_ids.count(p.gazetteer_id) > 0;
          for (const auto &a : p.admin_path) hit |= place_ids.count(a) > 0;
        }
      }
      if (!hit) continue;
      score += w.place;
    }
    if (q.period) {
      bool hit = false;
      for (const auto &p : r.periods) {
        bool before_end = !q.period->end || compare_coarse(p.begin, *q.period->end) <= 0;
        bool after_begin = !q.period->begin || compare_coarse(*q.period->begin, p.end) <= 0;
        hit |= before_end && after_begin;
      }
      if (!hit) continue;
      score += w.period;
    }
    if (q.concept_clause) {
      bool hit = false;
      std::size_t tf = 0;
      for (const auto &k : r.concepts) {
        if (!uris.count(k.uri)) continue;
        hit |= q.concept_clause->expand_broader || !k.inherited;
        tf += k.tf + (q.concept_clause->expand_broader ? k.narrower_tf : 0);
      }
      if (!hit) continue;
      score += w.thematic + w.term_bonus * static_cast<double>(tf);
    }
    out.push_back({r.doc_id, score});
  }
  std::sort(out.begin(), out.end(), [](const SearchHit &a, const SearchHit &b) {
    return a.score != b.score ? a.score > b.score : a.doc_id < b.doc_id;
  });
  return out;
}

// Random index records over a fixed pool of gazetteer places, dates and
// concepts, and random queries over the same pools.
class RandomSearchCorpora {
 public:
  RandomSearchCorpora(unsigned seed, const Gazetteer &gazetteer) : gen_(seed), gazetteer_(gazetteer) {}

  RandomDocs &gen() { return gen_; }

  const std::vector<std::pair<std::string, std::string>> &concept_pool() const { return kConcepts; }

  IndexPlace place(const std::string &id, SpatialKind kind = SpatialKind::kESA) const {
    const GazetteerEntry *e = gazetteer_.find(id);
    if (!e) throw std::logic_error("no gazetteer entry " + id);
    IndexPlace p{e->canonical_name(), e->country_code, e->latitude, e->longitude, kind, e->gazetteer_id, {}};
    for (const auto *a : gazetteer_.ancestors(id)) p.admin_path.push_back(a->gazetteer_id);
    return p;
  }

  PartialDate date() {
    int y = gen_.uniform(1985, 2015);
    switch (gen_.uniform(0, 2)) {
      case 0: return PartialDate::of(y);
      case 1: return PartialDate::of(y, gen_.uniform(1, 12));
      default: return PartialDate::of(y, gen_.uniform(1, 12), gen_.uniform(1, 28));
    }
  }

  std::pair<PartialDate, PartialDate> ordered_pair() {
    PartialDate a = date(), b = date();
    if (compare_coarse(a, b) > 0) std::swap(a, b);
    return {a, b};
  }

  std::vector<IndexRecord> records() {
    std::vector<IndexRecord> records;
    for (int d = gen_.uniform(0, 12); d > 0; --d) {
      IndexRecord r;
      r.doc_id = "doc" + std::to_string(records.size());
      r.title = "title " + r.doc_id;
      for (int k = gen_.uniform(0, 3); k > 0; --k) {
        if (gen_.uniform(0, 5) == 0) {
          r.places.push_back(
              {"Lieu Inconnu", "", gen_.real(-90, 90), gen_.real(-180, 180), SpatialKind::kESA, "", {}});
        } else {
          r.places.push_back(place(gen_.pick(kPlaceIds), gen_.coin() ? SpatialKind::kESA : SpatialKind::kESR));
        }
      }
      for (int k = gen_.uniform(0, 3); k > 0; --k) {
        auto [b, e] = ordered_pair();
        r.periods.push_back(gen_.coin() ? IndexPeriod{b, b} : IndexPeriod{b, e});
      }
      std::set<std::string> used;
      for (int k = gen_.uniform(0, 3); k > 0; --k) {
        const auto &[uri, label] = gen_.pick(kConcepts);
        if (!used.insert(uri).second) continue;
        bool inherited = gen_.coin();
        r.concepts.push_back({uri, label, inherited, inherited ? 0u : static_cast<std::size_t>(gen_.uniform(1, 4)),
                              static_cast<std::size_t>(gen_.uniform(0, 3))});
      }
      std::sort(r.concepts.begin(), r.concepts.end(), [](auto &a, auto &b) { return a.uri < b.uri; });
      records.push_back(std::move(r));
    }
    return records;
  }

  SearchWeights weights() { return {gen_.real(0.5, 2), gen_.real(0.5, 2), gen_.real(0.5, 2), 0.1}; }

  Query query() {
    Query q;
    do {
      if (gen_.coin()) {
        if (gen_.uniform(0, 3) == 0) {
          double lat = gen_.real(-60, 60), lon = gen_.real(-150, 150);
          q.place = PlaceClause{std::nullopt, BoundingBox{lat, lon, std::min(90.0, lat + gen_.real(0, 40)),
                                                          std::min(180.0, lon + gen_.real(0, 60))}};
        } else {
          q.place = PlaceClause{gen_.pick(kQueryNames), std::nullopt};
        }
      }
      if (gen_.coin()) {
        auto [b, e] = ordered_pair();
        q.period = PeriodClause{gen_.uniform(0, 4) ? std::optional(b) : std::nullopt,
                                gen_.uniform(0, 4) ? std::optional(e) : std::nullopt};
        if (!q.period->begin && !q.period->end) q.period->end = e;
      }
      if (gen_.coin()) {
        const auto &[uri, label] = gen_.pick(kConcepts);
        q.concept_clause = ConceptClause{gen_.coin() ? uri : label, gen_.coin()};
      }
    } while (!q.place && !q.period && !q.concept_clause);
    return q;
  }

 private:
  inline static const std::vector<std::string> kPlaceIds = {
      "fr", "paris", "paris-us", "bayonne-fr", "bayonne-us", "mg", "antananarivo", "senegal-river", "sn", "fr-64",
      "fr-idf"};
  inline static const std::vector<std::string> kQueryNames = {
      "France", "Paris", "Bayonne", "Madagascar", "Senegal", "Sénégal", "Île-de-France", "Pyrénées-Atlantiques",
      "Nowhere", "Texas", "Lieu Inconnu", "Bénin"};
  inline static const std::vector<std::pair<std::string, std::string>> kConcepts = {
      {"u:rice", "riz"}, {"u:cereals", "céréales"}, {"u:drought", "sécheresse"},
      {"u:climate", "climat"}, {"u:env", "environnement"}, {"u:rice-en", "Rice"}};

  RandomDocs gen_;
  const Gazetteer &gazetteer_;
};

// Outcome of one query against both implementations.
struct SearchComparison {
  bool oracle_threw = false;
  bool index_threw = false;
  std::vector<SearchHit> expected;
  std::vector<SearchHit> got;

  bool agree(double tolerance = 1e-9) const {
    if (oracle_threw || index_threw) return oracle_threw == index_threw;
    if (got.size() != expected.size()) return false;
    for (std::size_t i = 0; i < got.size(); ++i) {
      if (got[i].doc_id != expected[i].doc_id) return false;
      double d = got[i].score - expected[i].score;
      if (d > tolerance || d < -tolerance) return false;
    }
    return true;
  }
};

inline SearchComparison compare_search(const SearchIndex &index, const std::vector<IndexRecord> &records,
                                       const Query &q, const SearchWeights &w, const Gazetteer &gazetteer) {
  SearchComparison c;
  try {
    c.expected = brute_force_search(records, q, w, gazetteer);
  } catch (const UnknownPlaceName &) {
    c.oracle_threw = true;
  }
  try {
    c.got = index.search(q);
  } catch (const UnknownPlaceName &) {
    c.index_threw = true;
  }
  return c;
}

}  // namespace geoscope::testing

#endif  // GEOSCOPE_TESTS_SUPPORT_SEARCH_ORACLE_H_
