#ifndef GEOSCOPE_TEXT_H_
#define GEOSCOPE_TEXT_H_

// Unicode helpers shared by the annotators. All offsets exposed by the
// library are code point offsets; byte offsets stay internal to this module.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace geoscope {

std::u32string to_u32(std::string_view utf8);
std::string to_utf8(std::u32string_view text);
std::string to_utf8(char32_t cp);

// Number of code points in a UTF-8 string.
std::size_t code_point_length(std::string_view utf8);

// Substring by code point range [begin, end). Out of range is clamped.
std::string substr_cp(std::string_view utf8, std::size_t begin, std::size_t end);

// Maps code point offsets to byte offsets of a fixed UTF-8 string.
class OffsetMap {
 public:
  explicit OffsetMap(std::string_view utf8);
  std::size_t to_byte(std::size_t cp) const;
  std::size_t to_cp(std::size_t byte) const;
  std::size_t size() const { return byte_of_cp_.size() - 1; }

 private:
  std::vector<std::size_t> byte_of_cp_;
};

// Lowercase, NFD decomposition and removal of combining marks. Typographic
// apostrophes are mapped to ASCII.
std::string fold(std::string_view utf8);

std::string to_lower(std::string_view utf8);

bool is_letter(char32_t cp);
bool is_upper(char32_t cp);
bool is_alnum(char32_t cp);

// True when the first code point is an uppercase letter.
bool starts_upper(std::string_view utf8);

// Collapses every whitespace run into one space and trims both ends.
std::string collapse_whitespace(std::string_view utf8);

std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

enum class TokenType { kWord, kNumber, kPunct };

struct Token {
  std::string text;
  std::size_t begin = 0;  // code points
  std::size_t end = 0;
  TokenType type = TokenType::kWord;
  bool sentence_start = false;
};

// Word tokenizer for French and English. Hyphenated compounds stay one token,
// French elisions ("d'", "l'", "qu'") are split off with their apostrophe.
std::vector<Token> tokenize(std::string_view utf8);

// True for tokens of the form "d'" / "l'" (elided article or preposition).
bool is_elision(std::string_view token);

}  // namespace geoscope

#endif  // GEOSCOPE_TEXT_H_
