#ifndef GEOSCOPE_EVAL_H_
#define GEOSCOPE_EVAL_H_

// Precision, recall and F-measure of annotations against a gold corpus.

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "geoscope/corpus_model.h"

namespace geoscope {

// Dimensions: spatial, temporal, thematic. Kinds: ESA, ESR and organization
// (spatial), date and period (temporal), concept (thematic).
struct EvalSpan {
  std::string doc_id;
  std::size_t start = 0;
  std::size_t end = 0;
  std::string dimension;
  std::string kind;

  auto operator<=>(const EvalSpan &) const = default;
};

// Whether the kind belongs to the dimension.
bool valid_eval_kind(std::string_view dimension, std::string_view kind);

struct GoldCorpus {
  std::vector<EvalSpan> spans;

  // TSV rows doc_id, start, end, dimension, kind. '#' comments, blank lines
  // and a leading doc_id header row are skipped. Throws MalformedInput on bad rows and
  // on duplicate spans.
  static GoldCorpus parse(std::string_view tsv);
  static GoldCorpus load(const std::filesystem::path &path);
  std::string to_tsv() const;
};

// Throws InvariantViolation when a span lies outside its abstract or names
// a document that is not given.
void check_gold_bounds(const GoldCorpus &gold, const std::vector<DocumentRecord> &documents);

// Spans of one annotated document; organizations are optional extras.
std::vector<EvalSpan> system_spans(const AnnotatedDocument &doc,
                                   const std::vector<SpatialAnnotation> &organizations = {});

enum class MatchMode { kExact, kOverlap };
std::string to_string(MatchMode mode);

struct EvalCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  double precision() const;
  double recall() const;
  double f_measure() const;
  EvalCounts &operator+=(const EvalCounts &o);
  bool operator==(const EvalCounts &) const = default;
};

// 2PR/(P+R), 0 when P+R is 0.
double f_measure(double precision, double recall);

struct EvalReport {
  MatchMode mode = MatchMode::kExact;
  std::map<std::string, std::map<std::string, EvalCounts>> by_kind;  // dimension -> kind -> counts

  EvalCounts dimension(std::string_view dimension) const;
  // Sum over the listed kinds of one dimension.
  EvalCounts kinds(std::string_view dimension, const std::vector<std::string> &kinds) const;

  // One block per dimension in a results-table layout:
  // Précision, Rappel and F-mesure rows, one column per kind plus the total.
  std::string render_table() const;
  std::string to_json() const;
};

// Exact mode needs identical spans, overlap mode intersecting ones; kinds
// must agree in both. Gold spans are taken left to right, each claiming the
// first unmatched system span. Documents missing from the system output
// count their gold spans as false negatives.
EvalReport evaluate(const std::vector<EvalSpan> &system, const GoldCorpus &gold, MatchMode mode);

// "94,7%": one decimal with a decimal comma, dropped when zero.
std::string format_percent(double ratio);
// "0.74": two decimals.
std::string format_ratio(double ratio);

}  // namespace geoscope

#endif  // GEOSCOPE_EVAL_H_
