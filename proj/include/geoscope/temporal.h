#ifndef GEOSCOPE_TEMPORAL_H_
#define GEOSCOPE_TEMPORAL_H_

// Rule-based tagging and normalization of calendar expressions (dates and
// periods). Rules pair a regular expression with a named normalizer.

#include <filesystem>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "geoscope/corpus_model.h"

namespace geoscope {

// What a rule matches. Only date and period survive; the other classes are
// recognized so that their text is not read as a date.
enum class RuleClass { kDate, kPeriod, kDuration, kSet, kNone };

std::string to_string(RuleClass c);

enum class NormalizerKind {
  kDate,        // date(day, month, year) groups
  kMonthYear,   // month_year(month, year)
  kYear,        // year(year)
  kDecade,      // decade(digits): "1990" or "90" with the pivot century
  kRange,       // range(begin, end): each group parsed as date text
  kDctDays,     // dct_days(offset)
  kDctMonths,   // dct_months(offset)
  kDctYears,    // dct_years(offset)
  kDiscard,     // discard
};

struct TemporalRule {
  Language language = Language::kFr;
  std::string pattern;     // as written, with macros
  std::string normalizer;  // as written, e.g. "date(1,3,4)"
  NormalizerKind kind = NormalizerKind::kDiscard;
  std::vector<int> args;
  RuleClass rule_class = RuleClass::kNone;
  std::regex regex;
  std::size_t line = 0;
};

struct TemporalConfig {
  // Century added to two-digit decades: "années 90" is 1990 to 1999.
  int decade_pivot = 1900;
};

class TemporalRules {
 public:
  // Format documented in docs/temporal-rules.md. Throws ResourceError.
  static TemporalRules parse(std::string_view text);
  static TemporalRules load(const std::filesystem::path &path);

  const std::vector<TemporalRule> &rules() const { return rules_; }

  // Expands %YEAR%, %MONTH_FR%, %MONTH_EN% and %DAY%. Each macro is one
  // capturing group.
  static std::string expand_macros(std::string_view pattern);

 private:
  std::vector<TemporalRule> rules_;
};

struct TemporalResult {
  std::vector<TemporalAnnotation> annotations;
  std::vector<std::string> warnings;
};

// Applies the rules of the document language (both for mixed or unknown).
// Overlapping matches are resolved longest first; durations, frequencies and
// other discarded matches are dropped afterwards. Relative expressions need
// creation_date and are skipped with a warning otherwise.
TemporalResult annotate_temporal_detailed(const DocumentRecord &doc, const TemporalRules &rules,
                                          const TemporalConfig &config = {});

std::vector<TemporalAnnotation> annotate_temporal(const DocumentRecord &doc, const TemporalRules &rules,
                                                  const TemporalConfig &config = {});

}  // namespace geoscope

#endif  // GEOSCOPE_TEMPORAL_H_
