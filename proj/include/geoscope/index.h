#ifndef GEOSCOPE_INDEX_H_
#define GEOSCOPE_INDEX_H_

// The flattened, queryable projection of annotated documents, its JSON-lines
// persistence and the three-dimensional search over it.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "geoscope/corpus_model.h"

namespace geoscope {

class Gazetteer;
class Thesaurus;

struct IndexPlace {
  std::string canonical_name;
  std::string country_code;
  double lat = 0;
  double lon = 0;
  SpatialKind kind = SpatialKind::kESA;
  std::string gazetteer_id;
  std::vector<std::string> admin_path;  // gazetteer ancestors, direct parent first

  bool operator==(const IndexPlace &) const = default;
};

struct IndexPeriod {
  PartialDate begin;
  PartialDate end;  // equal to begin for a date

  bool operator==(const IndexPeriod &) const = default;
};

struct IndexConcept {
  std::string uri;
  std::string label;
  bool inherited = false;        // reached only through broader links
  std::size_t tf = 0;            // annotations of this concept
  std::size_t narrower_tf = 0;   // annotations of concepts below it

  bool operator==(const IndexConcept &) const = default;
};

struct IndexTerm {
  std::string term;
  double c_value = 0;

  bool operator==(const IndexTerm &) const = default;
};

struct IndexRecord {
  std::string doc_id;
  Source source = Source::kOther;
  Language language = Language::kUnknown;
  std::string title;
  std::optional<int> year;
  std::vector<IndexPlace> places;
  std::vector<IndexPeriod> periods;
  std::vector<IndexConcept> concepts;  // sorted by uri, one entry per uri
  std::vector<IndexTerm> terms;

  bool operator==(const IndexRecord &) const = default;
};

// One place entry per resolved spatial annotation, one period per temporal
// annotation, direct concepts plus their broader chains. The gazetteer, when
// given, supplies admin_path.
IndexRecord make_index_record(const AnnotatedDocument &doc, std::vector<IndexTerm> terms = {},
                              const Gazetteer *gazetteer = nullptr);

std::string to_json_line(const IndexRecord &record);
// Throws MalformedInput.
IndexRecord index_record_from_json(std::string_view line);

void write_index(std::ostream &out, const std::vector<IndexRecord> &records);
void write_index(const std::filesystem::path &path, const std::vector<IndexRecord> &records);
// Blank lines are skipped. Throws MalformedInput naming the line.
std::vector<IndexRecord> read_index(std::istream &in);
std::vector<IndexRecord> read_index(const std::filesystem::path &path);

struct BoundingBox {
  double min_lat = 0;
  double min_lon = 0;
  double max_lat = 0;
  double max_lon = 0;

  bool valid() const;
  bool contains(double lat, double lon) const;
};

struct PlaceClause {
  std::optional<std::string> name;
  std::optional<BoundingBox> bbox;
};

struct PeriodClause {
  std::optional<PartialDate> begin;  // open when absent
  std::optional<PartialDate> end;
};

struct ConceptClause {
  std::string uri_or_label;
  bool expand_broader = false;  // also match documents about narrower concepts
};

struct Query {
  std::optional<PlaceClause> place;
  std::optional<PeriodClause> period;
  std::optional<ConceptClause> concept_clause;
};

struct SearchWeights {
  double place = 1.0;
  double period = 1.0;
  double thematic = 1.0;
  double term_bonus = 0.1;  // per concept annotation in the document
};

struct SearchHit {
  std::string doc_id;
  double score = 0;

  bool operator==(const SearchHit &) const = default;
};

// In-memory inverted index rebuilt from records. Read-only after
// construction, so concurrent searches are safe.
class SearchIndex {
 public:
  // The gazetteer resolves alternate names and admin containment; the
  // thesaurus maps labels in any language to concept uris. Both may be null.
  explicit SearchIndex(std::vector<IndexRecord> records, const Gazetteer *gazetteer = nullptr,
                       const Thesaurus *thesaurus = nullptr, SearchWeights weights = {});

  const std::vector<IndexRecord> &records() const { return records_; }

  // Ranked by score, then doc_id. Throws InvalidQuery for an empty query, an
  // invalid bbox or an inverted period; UnknownPlaceName when a place name is
  // in neither the index nor the gazetteer.
  std::vector<SearchHit> search(const Query &query) const;

 private:
  using Postings = std::vector<std::size_t>;  // sorted record indices

  Postings place_candidates(const PlaceClause &clause) const;
  Postings period_candidates(const PeriodClause &clause) const;
  Postings concept_candidates(const ConceptClause &clause, std::vector<std::string> &uris) const;

  std::vector<IndexRecord> records_;
  const Gazetteer *gazetteer_;
  const Thesaurus *thesaurus_;
  SearchWeights weights_;
  std::unordered_map<std::string, Postings> by_place_name_;   // phrase_key of canonical name
  std::unordered_map<std::string, Postings> by_place_id_;     // gazetteer id and admin ancestors
  std::unordered_map<std::string, Postings> by_concept_;      // direct uri
  std::unordered_map<std::string, Postings> by_concept_any_;  // direct or inherited uri
  std::unordered_map<std::string, std::vector<std::string>> uris_by_label_;
  struct Interval {
    PartialDate begin;
    PartialDate end;
    std::size_t record = 0;
  };
  std::vector<Interval> intervals_;
  struct Point {
    double lat = 0;
    double lon = 0;
    std::size_t record = 0;
  };
  std::vector<Point> points_;
};

}  // namespace geoscope

#endif  // GEOSCOPE_INDEX_H_
