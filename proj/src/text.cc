#include "geoscope/text.h"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/locid.h>
#include <unicode/unistr.h>

#include <algorithm>

namespace geoscope {

namespace {

// Decodes one code point starting at s[i]; advances i. Invalid sequences
// yield U+FFFD and consume one byte.
char32_t decode(std::string_view s, std::size_t &i) {
  auto b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  int len = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    ++i;
    return 0xFFFD;
  }
  if (i + len > s.size()) {
    ++i;
    return 0xFFFD;
  }
  for (int k = 1; k < len; ++k) {
    auto b = static_cast<unsigned char>(s[i + k]);
    if ((b & 0xC0) != 0x80) {
      ++i;
      return 0xFFFD;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  i += len;
  return cp;
}

void encode(char32_t cp, std::string &out) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

bool is_apostrophe(char32_t cp) { return cp == U'\'' || cp == U'’'; }
bool is_hyphen(char32_t cp) { return cp == U'-' || cp == U'‐'; }

bool is_word_char(char32_t cp) {
  if (is_alnum(cp)) return true;
  auto type = u_charType(static_cast<UChar32>(cp));
  return type == U_NON_SPACING_MARK || type == U_COMBINING_SPACING_MARK;
}

bool is_space(char32_t cp) { return u_isUWhiteSpace(static_cast<UChar32>(cp)); }

}  // namespace

std::u32string to_u32(std::string_view utf8) {
  std::u32string out;
  out.reserve(utf8.size());
  for (std::size_t i = 0; i < utf8.size();) out += decode(utf8, i);
  return out;
}

std::string to_utf8(std::u32string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char32_t cp : text) encode(cp, out);
  return out;
}

std::string to_utf8(char32_t cp) {
  std::string out;
  encode(cp, out);
  return out;
}

std::size_t code_point_length(std::string_view utf8) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < utf8.size();) {
    decode(utf8, i);
    ++n;
  }
  return n;
}

std::string substr_cp(std::string_view utf8, std::size_t begin, std::size_t end) {
  OffsetMap map(utf8);
  begin = std::min(begin, map.size());
  end = std::clamp(end, begin, map.size());
  return std::string(utf8.substr(map.to_byte(begin), map.to_byte(end) - map.to_byte(begin)));
}

OffsetMap::OffsetMap(std::string_view utf8) {
  for (std::size_t i = 0; i < utf8.size();) {
    byte_of_cp_.push_back(i);
    decode(utf8, i);
  }
  byte_of_cp_.push_back(utf8.size());
}

std::size_t OffsetMap::to_byte(std::size_t cp) const {
  return byte_of_cp_[std::min(cp, byte_of_cp_.size() - 1)];
}

std::size_t OffsetMap::to_cp(std::size_t byte) const {
  auto it = std::lower_bound(byte_of_cp_.begin(), byte_of_cp_.end(), byte);
  return static_cast<std::size_t>(it - byte_of_cp_.begin());
}

std::string fold(std::string_view utf8) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2 *nfd = icu::Normalizer2::getNFDInstance(status);
  icu::UnicodeString source = icu::UnicodeString::fromUTF8(
      icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
  icu::UnicodeString decomposed = U_SUCCESS(status) ? nfd->normalize(source, status) : source;
  if (U_FAILURE(status)) decomposed = source;
  icu::UnicodeString stripped;
  for (int32_t i = 0; i < decomposed.length();) {
    UChar32 cp = decomposed.char32At(i);
    i += U16_LENGTH(cp);
    if (u_charType(cp) == U_NON_SPACING_MARK) continue;
    if (cp == 0x2019) cp = '\'';
    stripped.append(cp);
  }
  stripped.toLower(icu::Locale::getRoot());
  std::string out;
  stripped.toUTF8String(out);
  return out;
}

std::string to_lower(std::string_view utf8) {
  icu::UnicodeString s = icu::UnicodeString::fromUTF8(
      icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
  s.toLower(icu::Locale::getRoot());
  std::string out;
  s.toUTF8String(out);
  return out;
}

bool is_letter(char32_t cp) { return u_isalpha(static_cast<UChar32>(cp)); }
bool is_upper(char32_t cp) { return u_isupper(static_cast<UChar32>(cp)); }
bool is_alnum(char32_t cp) { return u_isalnum(static_cast<UChar32>(cp)); }

bool starts_upper(std::string_view utf8) {
  if (utf8.empty()) return false;
  std::size_t i = 0;
  return is_upper(decode(utf8, i));
}

std::string collapse_whitespace(std::string_view utf8) {
  std::string out;
  bool pending_space = false;
  for (std::size_t i = 0; i < utf8.size();) {
    char32_t cp = decode(utf8, i);
    if (is_space(cp)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    encode(cp, out);
  }
  return out;
}

std::string trim(std::string_view s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  auto b = std::find_if(s.begin(), s.end(), not_space);
  auto e = std::find_if(s.rbegin(), s.rend(), not_space).base();
  return b < e ? std::string(b, e) : std::string();
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      return out;
    }
    out.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

bool is_elision(std::string_view token) {
  static const char *const kElided[] = {"d'", "l'", "j'", "n'", "s'", "c'", "m'", "t'",
                                        "qu'", "jusqu'", "lorsqu'", "puisqu'"};
  std::string folded = fold(token);
  return std::find(std::begin(kElided), std::end(kElided), folded) != std::end(kElided);
}

std::vector<Token> tokenize(std::string_view utf8) {
  std::u32string text = to_u32(utf8);
  std::vector<Token> tokens;
  bool at_sentence_start = true;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    char32_t cp = text[i];
    if (is_space(cp)) {
      if (cp == U'\n') at_sentence_start = true;
      ++i;
      continue;
    }
    Token token;
    token.begin = i;
    token.sentence_start = at_sentence_start;
    if (is_word_char(cp)) {
      std::size_t j = i;
      bool all_digits = true;
      while (j < n) {
        if (is_word_char(text[j])) {
          if (!u_isdigit(static_cast<UChar32>(text[j]))) all_digits = false;
          ++j;
        } else if (is_hyphen(text[j]) && j + 1 < n && is_word_char(text[j + 1]) && j > i) {
          all_digits = false;
          ++j;
        } else {
          break;
        }
      }
      // French elision: the apostrophe stays with the short prefix.
      if (j < n && is_apostrophe(text[j]) && j + 1 < n && is_letter(text[j + 1])) {
        std::string candidate = to_utf8(text.substr(i, j - i + 1));
        if (is_elision(candidate)) ++j;
      }
      token.end = j;
      token.type = all_digits ? TokenType::kNumber : TokenType::kWord;
      at_sentence_start = false;
    } else {
      token.end = i + 1;
      token.type = TokenType::kPunct;
      at_sentence_start = (cp == U'.' || cp == U'!' || cp == U'?');
    }
    token.text = to_utf8(text.substr(token.begin, token.end - token.begin));
    tokens.push_back(std::move(token));
    i = tokens.back().end;
  }
  return tokens;
}

}  // namespace geoscope
