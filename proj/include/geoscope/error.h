#ifndef GEOSCOPE_ERROR_H_
#define GEOSCOPE_ERROR_H_

#include <stdexcept>
#include <string>

namespace geoscope {

// Base class for every error raised by the library. The kind() string is
// stable and is what the CLI and the HTTP service report.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string &message)
      : std::runtime_error(kind + ": " + message), kind_(std::move(kind)) {}
  const std::string &kind() const { return kind_; }

 private:
  std::string kind_;
};

#define GEOSCOPE_DEFINE_ERROR(Name)                                  \
  class Name : public Error {                                        \
   public:                                                           \
    explicit Name(const std::string &message) : Error(#Name, message) {} \
  }

GEOSCOPE_DEFINE_ERROR(MalformedXml);
GEOSCOPE_DEFINE_ERROR(DtdViolation);
GEOSCOPE_DEFINE_ERROR(InvariantViolation);
GEOSCOPE_DEFINE_ERROR(MalformedInput);
GEOSCOPE_DEFINE_ERROR(MissingRequiredField);
GEOSCOPE_DEFINE_ERROR(UnsupportedLanguage);
GEOSCOPE_DEFINE_ERROR(MalformedSkos);
GEOSCOPE_DEFINE_ERROR(CyclicBroader);
GEOSCOPE_DEFINE_ERROR(EmptyCorpus);
GEOSCOPE_DEFINE_ERROR(UnknownPlaceName);
GEOSCOPE_DEFINE_ERROR(ResourceError);
GEOSCOPE_DEFINE_ERROR(InvalidQuery);
GEOSCOPE_DEFINE_ERROR(NotFound);
GEOSCOPE_DEFINE_ERROR(Conflict);

#undef GEOSCOPE_DEFINE_ERROR

}  // namespace geoscope

#endif  // GEOSCOPE_ERROR_H_
