#ifndef GEOSCOPE_DTD_H_
#define GEOSCOPE_DTD_H_

// Validator for the DTD subset used by the shipped MODS-TI schemas:
// ELEMENT declarations (EMPTY, ANY, #PCDATA, mixed content and children
// models with ?, *, + over sequences and choices) and ATTLIST declarations
// (CDATA, NMTOKEN, ID, enumerations; #REQUIRED, #IMPLIED, #FIXED, defaults).
// Parameter entities are not supported. Elements nested anywhere below an
// ANY element are not checked.

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "geoscope/xml.h"

namespace geoscope {

class Dtd {
 public:
  struct Particle {
    enum class Kind { kName, kSeq, kChoice } kind = Kind::kName;
    char occurrence = '1';  // '1', '?', '*', '+'
    std::string name;
    std::vector<Particle> items;
  };

  struct ElementDecl {
    enum class Content { kEmpty, kAny, kPcdata, kMixed, kChildren } content = Content::kEmpty;
    std::vector<std::string> mixed_names;
    Particle model;
  };

  struct AttributeDecl {
    std::string name;
    std::string type;                     // CDATA, NMTOKEN, ID, ... or "enum"
    std::vector<std::string> enumerated;  // for enum types
    enum class Default { kRequired, kImplied, kFixed, kValue } default_kind = Default::kImplied;
    std::string default_value;
  };

  // Throws ResourceError on unsupported or malformed declarations.
  static Dtd parse(std::string_view text);

  // Adds the declarations of another DTD; later duplicates are ignored, the
  // way XML treats repeated declarations.
  void merge(const Dtd &other);

  bool declares(std::string_view element) const;
  const ElementDecl *element(std::string_view name) const;
  const std::vector<AttributeDecl> *attributes(std::string_view element) const;

  // Throws DtdViolation naming the offending element.
  void validate(const xml::Node &root) const;

 private:
  void validate_node(const xml::Node &node) const;

  std::map<std::string, ElementDecl, std::less<>> elements_;
  std::map<std::string, std::vector<AttributeDecl>, std::less<>> attlists_;
};

}  // namespace geoscope

#endif  // GEOSCOPE_DTD_H_
