#ifndef GEOSCOPE_SPATIAL_H_
#define GEOSCOPE_SPATIAL_H_

// Spatial entity extraction: pattern grammar for absolute (ESA) and relative
// (ESR) entities, organization filtering and gazetteer disambiguation.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "geoscope/corpus_model.h"

namespace geoscope {

// Lookup key shared by gazetteer names and lexicon phrases: folded,
// whitespace collapsed.
std::string phrase_key(std::string_view text);

struct GazetteerName {
  std::string name;
  std::string language;  // empty when unspecified

  bool operator==(const GazetteerName &) const = default;
};

struct GazetteerEntry {
  std::string gazetteer_id;
  std::vector<GazetteerName> names;  // first one is canonical
  double latitude = 0;
  double longitude = 0;
  FeatureClass feature_class = FeatureClass::kOther;
  std::string country_code;
  std::uint64_t population = 0;
  std::optional<std::string> admin_parent;

  const std::string &canonical_name() const { return names.front().name; }
  bool operator==(const GazetteerEntry &) const = default;
};

class Gazetteer {
 public:
  Gazetteer() = default;
  explicit Gazetteer(std::vector<GazetteerEntry> entries);  // throws ResourceError

  // TSV layout documented in docs/gazetteer.md. Throws ResourceError.
  static Gazetteer parse(std::string_view tsv);
  static Gazetteer load(const std::filesystem::path &path);

  const std::vector<GazetteerEntry> &entries() const { return entries_; }
  const GazetteerEntry *find(std::string_view id) const;

  // Entries carrying the name, compared under phrase_key. Sorted by id.
  std::vector<const GazetteerEntry *> lookup(std::string_view name) const;
  bool contains_name(std::string_view name) const { return names_.count(phrase_key(name)) > 0; }

  // Parent chain from the direct parent to the root.
  std::vector<const GazetteerEntry *> ancestors(std::string_view id) const;

  std::uint64_t max_population() const { return max_population_; }
  // Longest name in tokens, bounding the window of name lookups.
  std::size_t max_name_tokens() const { return max_name_tokens_; }

 private:
  std::vector<GazetteerEntry> entries_;
  std::unordered_map<std::string, std::size_t> by_id_;
  std::unordered_map<std::string, std::vector<std::size_t>> names_;
  std::uint64_t max_population_ = 0;
  std::size_t max_name_tokens_ = 0;
};

struct LanguageLexicon {
  std::map<std::string, FeatureClass> feature_nouns;  // keyed by phrase_key
  std::map<std::string, Indicator> indicators;
  std::set<std::string> action_verbs;
  std::set<std::string> stop_titles;
  std::set<std::string> adverbs;

  std::size_t max_phrase_tokens = 1;
};

class SpatialLexicon {
 public:
  SpatialLexicon() = default;
  SpatialLexicon(LanguageLexicon fr, LanguageLexicon en);  // checks indicator coverage

  // One language file; see docs/gazetteer.md for the format. Throws
  // ResourceError.
  static LanguageLexicon parse_language(std::string_view text);
  // Reads lexicon_fr.txt and lexicon_en.txt from a resource directory.
  static SpatialLexicon load(const std::filesystem::path &dir);

  // Throws UnsupportedLanguage for anything but fr and en.
  const LanguageLexicon &of(Language language) const;

 private:
  LanguageLexicon fr_;
  LanguageLexicon en_;
};

struct ResolverWeights {
  double feature_class = 0.5;
  double context_country = 0.3;
  double population = 0.2;
};

struct ScoredEntry {
  const GazetteerEntry *entry = nullptr;
  double score = 0;
};

class Resolver {
 public:
  Resolver(const Gazetteer &gazetteer, const SpatialLexicon &lexicon, ResolverWeights weights = {});

  // Names tried against the gazetteer, in order: the full entity surface,
  // then its proper-name part.
  std::vector<std::string> candidate_names(const SpatialAnnotation &candidate) const;

  // Entries matching the first candidate name that has any, scored and
  // ranked best first.
  std::vector<ScoredEntry> score(const SpatialAnnotation &candidate,
                                 const std::vector<SpatialAnnotation> &context) const;

  std::optional<GazetteerResolution> resolve(const SpatialAnnotation &candidate,
                                             const std::vector<SpatialAnnotation> &context) const;

  // Most frequent country among resolved context entries; ties go to the
  // smallest code. Empty without resolved context.
  static std::string modal_country(const std::vector<SpatialAnnotation> &context);

 private:
  std::optional<FeatureClass> feature_noun_class(const SpatialAnnotation &candidate) const;

  const Gazetteer &gazetteer_;
  const SpatialLexicon &lexicon_;
  ResolverWeights weights_;
};

// Unresolved candidates matching the ESA/ESR grammar of the language. mixed
// runs both grammars and keeps the longer span on overlaps. Throws
// UnsupportedLanguage for unknown.
std::vector<SpatialAnnotation> extract_spatial_candidates(std::string_view abstract, Language language,
                                                          const SpatialLexicon &lexicon, const Gazetteer &gazetteer);

struct OrganizationFilterResult {
  std::vector<SpatialAnnotation> kept;
  std::vector<SpatialAnnotation> organizations;
};

// Rejects candidates followed, within three tokens not counting adverbs, by an
// action verb.
OrganizationFilterResult filter_organizations(std::vector<SpatialAnnotation> candidates, std::string_view abstract,
                                              Language language, const SpatialLexicon &lexicon);

struct SpatialResult {
  std::vector<SpatialAnnotation> annotations;
  std::vector<SpatialAnnotation> organizations;
};

// extract, filter, then two-pass resolution. Documents of unknown language
// go through both grammars.
SpatialResult annotate_spatial_detailed(const DocumentRecord &doc, const Gazetteer &gazetteer,
                                        const SpatialLexicon &lexicon, ResolverWeights weights = {});

std::vector<SpatialAnnotation> annotate_spatial(const DocumentRecord &doc, const Gazetteer &gazetteer,
                                                const SpatialLexicon &lexicon, ResolverWeights weights = {});

}  // namespace geoscope

#endif  // GEOSCOPE_SPATIAL_H_
