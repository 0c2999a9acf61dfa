#ifndef GEOSCOPE_THEMATIC_H_
#define GEOSCOPE_THEMATIC_H_

// Thesaurus-based concept annotation (SKOS) and C-value term extraction.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "geoscope/corpus_model.h"

namespace geoscope {

struct ThesaurusConcept {
  std::string uri;
  std::map<std::string, std::string> pref_labels;              // language -> label; "" when untagged
  std::map<std::string, std::vector<std::string>> alt_labels;  // the "used for" terms
  std::optional<std::string> broader_uri;

  bool operator==(const ThesaurusConcept &) const = default;
};

class Thesaurus {
 public:
  Thesaurus() = default;

  // Reads skos:Concept elements (or rdf:Description typed skos:Concept) with
  // prefLabel, altLabel and broader. Throws MalformedSkos or CyclicBroader.
  static Thesaurus load_skos(std::string_view xml);
  static Thesaurus load(const std::filesystem::path &path);

  const std::vector<ThesaurusConcept> &concepts() const { return concepts_; }
  const ThesaurusConcept *find(std::string_view uri) const;

  // Ancestors from the direct parent to the root.
  std::vector<const ThesaurusConcept *> broader_chain(std::string_view uri) const;

  // Preferred label in the language, else English, French, untagged, then
  // the first available one.
  static std::string pref_label(const ThesaurusConcept &c, std::string_view language);

  // Concepts with a pref or alt label whose label_key equals key in the
  // language (untagged labels match every language). Sorted by uri.
  std::vector<const ThesaurusConcept *> lookup(std::string_view key, std::string_view language) const;

  std::size_t max_label_tokens() const { return max_label_tokens_; }

 private:
  void build_index();

  std::vector<ThesaurusConcept> concepts_;
  std::unordered_map<std::string, std::size_t> by_uri_;
  // language -> label key -> concept indices
  std::map<std::string, std::unordered_map<std::string, std::vector<std::size_t>>> index_;
  std::size_t max_label_tokens_ = 0;
};

// A label occurrence before enrichment.
struct ConceptMatch {
  Span span;
  std::string surface_text;
  const ThesaurusConcept *concept_ptr = nullptr;
  std::string language;  // language of the matched label set
};

// Longest-match, non-overlapping lookup of thesaurus labels in the abstract.
// Mixed documents are matched sentence by sentence in each sentence's
// language.
std::vector<ConceptMatch> match_concepts(const DocumentRecord &doc, const Thesaurus &thesaurus);

// Attaches preferred label, used-for labels and broader chain.
std::vector<ThematicAnnotation> enrich_concepts(const std::vector<ConceptMatch> &matches, const Thesaurus &thesaurus);

std::vector<ThematicAnnotation> annotate_thematic(const DocumentRecord &doc, const Thesaurus &thesaurus);

struct TermCandidate {
  std::string surface;  // lowercase words joined by single spaces
  std::size_t frequency = 0;
  std::size_t length_words = 0;
  std::vector<std::string> nested_in;  // longer candidates containing this one, sorted
  double c_value = 0;
  double tf_idf = 0;
  std::size_t document_frequency = 0;

  bool operator==(const TermCandidate &) const = default;
};

inline constexpr std::size_t kMaxTermWords = 5;

// Word sequences between stopwords, punctuation and numbers, one per chunk.
std::vector<std::vector<std::string>> term_chunks(std::string_view abstract, Language language);

// C-value ranking over the corpus: candidates are all 1..5-grams inside
// chunks. Ranked by C-value, then frequency, then surface. Throws EmptyCorpus
// when no abstract has text.
std::vector<TermCandidate> extract_terms_cvalue(const std::vector<std::string> &corpus, Language language);

}  // namespace geoscope

#endif  // GEOSCOPE_THEMATIC_H_
