#ifndef GEOSCOPE_INGEST_H_
#define GEOSCOPE_INGEST_H_

// Source format detection and normalization of raw metadata records (MODS,
// Dublin-Core-style XML, RDF thesis records) into DocumentRecords.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "geoscope/corpus_model.h"

namespace geoscope {

enum class SourceFormat { kMods, kDcXml, kRdf, kUnknown };

std::string to_string(SourceFormat f);
std::optional<SourceFormat> source_format_from_string(std::string_view s);

struct SourceFile {
  std::string path;  // may be empty for in-memory input
  std::optional<SourceFormat> declared_format;
  std::string bytes;

  // Throws MalformedInput when the file cannot be read or is empty.
  static SourceFile read(const std::filesystem::path &path,
                         std::optional<SourceFormat> declared = std::nullopt);
};

// One row of the crosswalk table.
struct CrosswalkRule {
  SourceFormat format = SourceFormat::kUnknown;
  std::string path;    // see docs/crosswalk.md
  std::string target;  // doc_id, source, title, abstract, creation_date, language
};

class Crosswalk {
 public:
  // Reads the markdown table rows. Throws ResourceError on unknown formats
  // or targets.
  static Crosswalk parse(std::string_view markdown);
  static Crosswalk load(const std::filesystem::path &path);
  // The table shipped in docs/crosswalk.md, compiled in.
  static const Crosswalk &shipped();

  std::vector<CrosswalkRule> rules_for(SourceFormat format) const;
  const std::vector<CrosswalkRule> &rules() const { return rules_; }

 private:
  std::vector<CrosswalkRule> rules_;
};

// Throws MalformedInput when the bytes are not XML. The declared format is
// not consulted here.
SourceFormat detect_format(const SourceFile &file);

// Maps the file through the crosswalk. Throws MissingRequiredField without a
// title, MalformedInput when the format is unknown. An unparseable date
// appends a warning and leaves creation_date unset.
DocumentRecord normalize(const SourceFile &file, const Crosswalk &crosswalk = Crosswalk::shipped(),
                         std::vector<std::string> *warnings = nullptr);

// Canonical qualified name of an element or attribute namespace, as used in
// crosswalk paths and extra_metadata keys.
std::string canonical_name(std::string_view ns, std::string_view local, std::string_view written);

}  // namespace geoscope

#endif  // GEOSCOPE_INGEST_H_
