#ifndef GEOSCOPE_CORPUS_MODEL_H_
#define GEOSCOPE_CORPUS_MODEL_H_

// The MODS-TI document model: a normalized MODS record plus the spatial,
// temporal and thematic annotation blocks, and its XML serialization.

#include <compare>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "geoscope/dates.h"

namespace geoscope {

class Dtd;

enum class Source { kIstex, kAgritrop, kAnrt, kOther };
enum class Language { kFr, kEn, kMixed, kUnknown };

std::string to_string(Source source);
std::string to_string(Language language);
Source source_from_string(std::string_view s);      // unknown values map to kOther
Language language_from_string(std::string_view s);  // accepts ISO 639-1/2 codes and names

// Half-open range of code point offsets into the abstract.
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t length() const { return end - start; }
  bool contains(const Span &o) const { return start <= o.start && o.end <= end; }
  bool overlaps(const Span &o) const { return start < o.end && o.start < end; }
  auto operator<=>(const Span &) const = default;
};

using MetadataPairs = std::vector<std::pair<std::string, std::string>>;

struct DocumentRecord {
  std::string doc_id;
  Source source = Source::kOther;
  Language language = Language::kUnknown;
  std::string title;
  std::string abstract;
  std::optional<PartialDate> creation_date;
  MetadataPairs extra_metadata;

  bool operator==(const DocumentRecord &) const = default;
};

enum class FeatureClass { kPopulatedPlace, kAdministrative, kHydrographic, kTerrain, kRegion, kCountry, kOther };
enum class SpatialKind { kESA, kESR };
enum class Indicator { kOrientation, kDistance, kAdjacency, kInclusion, kGeometricFigure };

std::string to_string(FeatureClass c);
std::string to_string(SpatialKind k);
std::string to_string(Indicator i);
std::optional<FeatureClass> feature_class_from_string(std::string_view s);
std::optional<Indicator> indicator_from_string(std::string_view s);

struct GazetteerResolution {
  std::string gazetteer_id;
  std::string canonical_name;
  double latitude = 0;
  double longitude = 0;
  FeatureClass feature_class = FeatureClass::kOther;
  std::string country_code;
  double score = 0;

  bool operator==(const GazetteerResolution &) const = default;
};

// The absolute entity an ESR is built on.
struct AnchorRef {
  Span span;
  std::string surface_text;
  std::optional<std::string> feature_noun;

  bool operator==(const AnchorRef &) const = default;
};

struct SpatialAnnotation {
  Span span;
  std::string surface_text;
  SpatialKind kind = SpatialKind::kESA;
  std::optional<Indicator> indicator;
  std::optional<std::string> feature_noun;
  std::optional<AnchorRef> anchor;
  std::optional<GazetteerResolution> resolution;

  bool operator==(const SpatialAnnotation &) const = default;
};

enum class TimexClass { kDate, kPeriod };

struct TemporalAnnotation {
  Span span;
  std::string surface_text;
  TimexClass timex_class = TimexClass::kDate;
  PartialDate value_begin;
  std::optional<PartialDate> value_end;

  bool operator==(const TemporalAnnotation &) const = default;
};

struct ConceptRef {
  std::string uri;
  std::string label;

  bool operator==(const ConceptRef &) const = default;
};

struct ThematicAnnotation {
  Span span;
  std::string surface_text;
  std::string concept_uri;
  std::string pref_label;
  std::vector<std::string> used_for;
  std::vector<ConceptRef> broader;  // direct parent first

  bool operator==(const ThematicAnnotation &) const = default;
};

struct AnnotatedDocument {
  DocumentRecord record;
  std::vector<SpatialAnnotation> spatial;
  std::vector<TemporalAnnotation> temporal;
  std::vector<ThematicAnnotation> thematic;

  // Sorts every list by span and checks all invariants; throws
  // InvariantViolation (duplicate spans included).
  static AnnotatedDocument create(DocumentRecord record, std::vector<SpatialAnnotation> spatial,
                                  std::vector<TemporalAnnotation> temporal,
                                  std::vector<ThematicAnnotation> thematic);

  bool operator==(const AnnotatedDocument &) const = default;
};

// Throws InvariantViolation describing the first broken invariant.
void check_invariants(const DocumentRecord &record);
void check_invariants(const AnnotatedDocument &doc);

// Normalization under which thematic surface forms match labels: folded,
// tokenized, one trailing s/x removed from words longer than three letters.
std::string label_key(std::string_view text);

// Doctype system id written in serialized documents.
inline constexpr std::string_view kModsTiSystemId = "mods-ti.dtd";
inline constexpr std::string_view kModsNamespace = "http://www.loc.gov/mods/v3";

std::string serialize_mods_ti(const AnnotatedDocument &doc);

// Throws MalformedXml, DtdViolation or InvariantViolation.
AnnotatedDocument parse_mods_ti(std::string_view xml);

// The shipped MODS-TI schema: document subset plus the three annotation
// DTDs, merged.
const Dtd &mods_ti_schema();

// Raw text of one shipped schema file, by file name (e.g.
// "spatialAnnotations.dtd"). Empty when unknown.
std::string_view schema_text(std::string_view file_name);

// Validates serialized MODS-TI; throws MalformedXml or DtdViolation.
void validate_mods_ti(std::string_view xml);

// Several documents under one modsCollection root.
std::string serialize_mods_ti_collection(const std::vector<AnnotatedDocument> &docs);
// Throws MalformedXml, DtdViolation or InvariantViolation.
std::vector<AnnotatedDocument> parse_mods_ti_collection(std::string_view xml);
void validate_mods_ti_collection(std::string_view xml);

}  // namespace geoscope

#endif  // GEOSCOPE_CORPUS_MODEL_H_
