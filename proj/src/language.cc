#include "geoscope/language.h"

#include "geoscope/text.h"

namespace geoscope {

namespace {

const std::unordered_set<std::string> kFrench = {
    "le", "la", "les", "l'", "un", "une", "des", "du", "de", "d'", "et", "ou", "est", "sont",
    "dans", "sur", "pour", "par", "avec", "sans", "ce", "cet", "cette", "ces", "qui", "que",
    "qu'", "dont", "au", "aux", "il", "elle", "ils", "elles", "nous", "vous", "leur", "leurs",
    "son", "sa", "ses", "ne", "pas", "plus", "mais", "entre", "ont", "ete", "etre", "avoir",
    "aussi", "tres", "selon", "chez", "lors", "depuis", "notre", "nos", "votre", "se", "s'",
    "n'", "c'", "j'", "y", "en", "comme", "si", "sous", "vers", "cela", "ainsi", "dont",
    "apres", "avant", "pendant", "tout", "tous", "toute", "toutes", "autre", "autres", "afin",
    "car", "donc", "puis", "ici", "lui",
};

const std::unordered_set<std::string> kEnglish = {
    "the", "of", "and", "or", "is", "are", "was", "were", "be", "been", "being", "to", "in",
    "for", "with", "without", "by", "from", "this", "that", "these", "those", "which", "who",
    "whom", "whose", "it", "its", "they", "their", "them", "we", "our", "you", "your", "he",
    "she", "his", "her", "not", "but", "than", "then", "there", "here", "has", "have", "had",
    "do", "does", "did", "at", "as", "an", "also", "into", "onto", "over", "under", "between",
    "during", "after", "before", "about", "such", "can", "could", "may", "might", "will",
    "would", "should", "must", "all", "any", "each", "both", "other", "more", "most", "some",
    "while", "where", "when", "how", "what", "so", "if", "because", "through", "within",
    "a", "on", "off", "per", "via", "up", "out", "no", "nor", "among", "across", "upon",
    "against", "towards", "toward", "along", "around", "i", "me", "my", "us", "very",
};

}  // namespace

const std::unordered_set<std::string> &stopwords(Language language) {
  static const std::unordered_set<std::string> kEmpty;
  switch (language) {
    case Language::kFr: return kFrench;
    case Language::kEn: return kEnglish;
    default: return kEmpty;
  }
}

bool is_stopword(std::string_view folded_word, Language language) {
  std::string w(folded_word);
  if (language == Language::kMixed || language == Language::kUnknown) {
    return kFrench.count(w) || kEnglish.count(w);
  }
  return stopwords(language).count(w) > 0;
}

LanguageProfile language_profile(std::string_view text) {
  LanguageProfile p;
  std::size_t fr = 0, en = 0;
  for (const auto &tok : tokenize(text)) {
    if (tok.type == TokenType::kPunct) continue;
    ++p.tokens;
    std::string f = fold(tok.text);
    if (kFrench.count(f)) ++fr;
    if (kEnglish.count(f)) ++en;
  }
  if (p.tokens > 0) {
    p.fr_share = static_cast<double>(fr) / static_cast<double>(p.tokens);
    p.en_share = static_cast<double>(en) / static_cast<double>(p.tokens);
  }
  return p;
}

Language detect_language(std::string_view text, double mixed_threshold) {
  LanguageProfile p = language_profile(text);
  if (p.fr_share > mixed_threshold && p.en_share > mixed_threshold) return Language::kMixed;
  if (p.fr_share == 0 && p.en_share == 0) return Language::kUnknown;
  return p.fr_share >= p.en_share ? Language::kFr : Language::kEn;
}

std::vector<LanguageSegment> language_segments(std::string_view text) {
  std::vector<LanguageSegment> out;
  auto tokens = tokenize(text);
  std::size_t i = 0;
  while (i < tokens.size()) {
    std::size_t j = i + 1;
    while (j < tokens.size() && !tokens[j].sentence_start) ++j;
    LanguageSegment seg;
    seg.start = tokens[i].begin;
    seg.end = tokens[j - 1].end;
    std::size_t fr = 0, en = 0;
    for (std::size_t k = i; k < j; ++k) {
      std::string f = fold(tokens[k].text);
      if (kFrench.count(f)) ++fr;
      if (kEnglish.count(f)) ++en;
    }
    seg.language = fr == 0 && en == 0 ? Language::kUnknown : (fr >= en ? Language::kFr : Language::kEn);
    out.push_back(seg);
    i = j;
  }
  return out;
}

}  // namespace geoscope
