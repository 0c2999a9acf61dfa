#ifndef GEOSCOPE_LANGUAGE_H_
#define GEOSCOPE_LANGUAGE_H_

#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "geoscope/corpus_model.h"

namespace geoscope {

// Folded stopword lists. Words common to both languages ("a", "on", ...)
// appear only where they are unambiguous, so they do not skew detection.
const std::unordered_set<std::string> &stopwords(Language language);
bool is_stopword(std::string_view folded_word, Language language);

struct LanguageProfile {
  std::size_t tokens = 0;
  double fr_share = 0;
  double en_share = 0;
};

LanguageProfile language_profile(std::string_view text);

// mixed when both stopword shares exceed the threshold, otherwise the
// language with the larger share; unknown without any stopword.
Language detect_language(std::string_view text, double mixed_threshold = 0.10);

struct LanguageSegment {
  std::size_t start = 0;  // code points
  std::size_t end = 0;
  Language language = Language::kUnknown;
};

// Splits text into sentences and labels each one fr, en or unknown.
std::vector<LanguageSegment> language_segments(std::string_view text);

}  // namespace geoscope

#endif  // GEOSCOPE_LANGUAGE_H_
