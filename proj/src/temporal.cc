#include "geoscope/temporal.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>

#include "geoscope/error.h"
#include "geoscope/text.h"

namespace geoscope {

namespace {

struct MacroDef {
  std::string_view name;
  std::string_view expansion;
};

constexpr MacroDef kMacros[] = {
    {"%YEAR%", "(1[0-9]{3}|20[0-9]{2})"},
    {"%MONTH_FR%",
     "(janvier|f(?:é|e)vrier|mars|avril|mai|juin|juillet|ao(?:û|u)t|septembre|octobre|novembre|d(?:é|e)cembre|"
     "janv\\.|f(?:é|e)vr\\.|avr\\.|juil\\.|sept\\.|oct\\.|nov\\.|d(?:é|e)c\\.)"},
    {"%MONTH_EN%",
     "(january|february|march|april|may|june|july|august|september|october|november|december|"
     "jan\\.?|feb\\.?|mar\\.?|apr\\.?|jun\\.?|jul\\.?|aug\\.?|sept?\\.?|oct\\.?|nov\\.?|dec\\.?)"},
    {"%DAY%", "(3[01]|[12][0-9]|0?[1-9])"},
};

struct NormalizerSpec {
  std::string_view name;
  NormalizerKind kind;
  std::vector<int> default_args;
  std::size_t arity;
  std::vector<RuleClass> classes;
  bool group_args;  // arguments are capture group numbers
};

const std::vector<NormalizerSpec> &normalizer_specs() {
  static const std::vector<NormalizerSpec> specs = {
      {"date", NormalizerKind::kDate, {1, 2, 3}, 3, {RuleClass::kDate}, true},
      {"month_year", NormalizerKind::kMonthYear, {1, 2}, 2, {RuleClass::kDate}, true},
      {"year", NormalizerKind::kYear, {1}, 1, {RuleClass::kDate}, true},
      {"decade", NormalizerKind::kDecade, {1}, 1, {RuleClass::kPeriod}, true},
      {"range", NormalizerKind::kRange, {1, 2}, 2, {RuleClass::kPeriod}, true},
      {"dct_days", NormalizerKind::kDctDays, {}, 1, {RuleClass::kDate}, false},
      {"dct_months", NormalizerKind::kDctMonths, {}, 1, {RuleClass::kDate}, false},
      {"dct_years", NormalizerKind::kDctYears, {}, 1, {RuleClass::kDate}, false},
      {"discard", NormalizerKind::kDiscard, {}, 0, {RuleClass::kDuration, RuleClass::kSet, RuleClass::kNone}, false},
  };
  return specs;
}

std::optional<RuleClass> rule_class_from_string(std::string_view s) {
  if (s == "date") return RuleClass::kDate;
  if (s == "period") return RuleClass::kPeriod;
  if (s == "duration") return RuleClass::kDuration;
  if (s == "set") return RuleClass::kSet;
  if (s == "none") return RuleClass::kNone;
  return std::nullopt;
}

std::optional<int> to_int(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

// Leading digits of "1er", "3rd", "15".
std::optional<int> leading_number(std::string_view s) {
  std::size_t n = 0;
  while (n < s.size() && s[n] >= '0' && s[n] <= '9') ++n;
  return n ? to_int(s.substr(0, n)) : std::nullopt;
}

int month_value(std::string_view s) {
  if (auto n = leading_number(s); n && *n >= 1 && *n <= 12) return *n;
  return month_from_name(s);
}

}  // namespace

std::string to_string(RuleClass c) {
  switch (c) {
    case RuleClass::kDate: return "date";
    case RuleClass::kPeriod: return "period";
    case RuleClass::kDuration: return "duration";
    case RuleClass::kSet: return "set";
    case RuleClass::kNone: return "none";
  }
  return "none";
}

std::string TemporalRules::expand_macros(std::string_view pattern) {
  std::string out(pattern);
  for (const auto &m : kMacros) {
    for (std::size_t pos = out.find(m.name); pos != std::string::npos; pos = out.find(m.name, pos + m.expansion.size())) {
      out.replace(pos, m.name.size(), m.expansion);
    }
  }
  return out;
}

TemporalRules TemporalRules::parse(std::string_view text) {
  TemporalRules rules;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto fail = [&](const std::string &msg) {
      throw ResourceError("temporal rules line " + std::to_string(line_no) + ": " + msg);
    };
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || trim(line).front() == '#') continue;
    auto cols = split(line, '\t');
    if (cols.size() != 4) fail("expected 4 tab-separated columns, got " + std::to_string(cols.size()));
    for (auto &c : cols) c = trim(c);

    TemporalRule rule;
    rule.line = line_no;
    if (cols[0] == "fr") {
      rule.language = Language::kFr;
    } else if (cols[0] == "en") {
      rule.language = Language::kEn;
    } else if (cols[0] == "any") {
      rule.language = Language::kUnknown;
    } else {
      fail("unknown language '" + cols[0] + "'");
    }

    rule.pattern = cols[1];
    try {
      rule.regex = std::regex(expand_macros(rule.pattern), std::regex::ECMAScript | std::regex::icase);
    } catch (const std::regex_error &e) {
      fail("pattern does not compile: " + std::string(e.what()));
    }

    rule.normalizer = cols[2];
    std::string name = cols[2];
    std::vector<std::string> raw_args;
    if (auto open = name.find('('); open != std::string::npos) {
      if (name.back() != ')') fail("malformed normalizer '" + cols[2] + "'");
      for (const auto &a : split(std::string_view(name).substr(open + 1, name.size() - open - 2), ',')) {
        raw_args.push_back(trim(a));
      }
      name = name.substr(0, open);
    }
    auto spec = std::find_if(normalizer_specs().begin(), normalizer_specs().end(),
                             [&](const NormalizerSpec &s) { return s.name == name; });
    if (spec == normalizer_specs().end()) fail("unknown normalizer '" + name + "'");
    rule.kind = spec->kind;
    if (raw_args.empty()) {
      rule.args = spec->default_args;
    } else {
      for (const auto &a : raw_args) {
        auto v = to_int(a);
        if (!v) fail("normalizer argument '" + a + "' is not an integer");
        rule.args.push_back(*v);
      }
    }
    if (rule.args.size() != spec->arity) fail("normalizer " + name + " takes " + std::to_string(spec->arity) + " arguments");
    if (spec->group_args) {
      for (int g : rule.args) {
        if (g < 1 || static_cast<std::size_t>(g) > rule.regex.mark_count()) {
          fail("capture group " + std::to_string(g) + " does not exist in the pattern");
        }
      }
    }

    auto cls = rule_class_from_string(cols[3]);
    if (!cls) fail("unknown class '" + cols[3] + "'");
    if (std::find(spec->classes.begin(), spec->classes.end(), *cls) == spec->classes.end()) {
      fail("normalizer " + name + " cannot yield class " + cols[3]);
    }
    rule.rule_class = *cls;
    rules.rules_.push_back(std::move(rule));
  }
  return rules;
}

TemporalRules TemporalRules::load(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ResourceError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

namespace {

struct Match {
  std::size_t begin = 0;  // bytes
  std::size_t end = 0;
  std::size_t rule = 0;
  std::vector<std::string> groups;  // index 0 is the whole match
};

enum class Outcome { kKeep, kDiscard, kInvalid, kNeedsDct };

struct Normalized {
  Outcome outcome = Outcome::kInvalid;
  TimexClass timex_class = TimexClass::kDate;
  PartialDate begin;
  std::optional<PartialDate> end;
};

Normalized normalize(const TemporalRule &rule, const Match &m, const std::optional<PartialDate> &dct,
                     const TemporalConfig &config) {
  Normalized n;
  auto group = [&](int k) -> const std::string & { return m.groups[static_cast<std::size_t>(k)]; };
  auto date = [&](PartialDate d) {
    if (!d.valid()) return n;
    n.outcome = Outcome::kKeep;
    n.begin = d;
    return n;
  };
  auto period = [&](PartialDate b, PartialDate e) {
    if (!b.valid() || !e.valid() || compare_coarse(b, e) > 0) return n;
    n.outcome = Outcome::kKeep;
    n.timex_class = TimexClass::kPeriod;
    n.begin = b;
    n.end = e;
    return n;
  };
  switch (rule.kind) {
    case NormalizerKind::kDate: {
      auto d = leading_number(group(rule.args[0]));
      auto y = leading_number(group(rule.args[2]));
      if (!d || !y) return n;
      return date(PartialDate::of(*y, month_value(group(rule.args[1])), *d));
    }
    case NormalizerKind::kMonthYear: {
      auto y = leading_number(group(rule.args[1]));
      if (!y) return n;
      return date(PartialDate::of(*y, month_value(group(rule.args[0]))));
    }
    case NormalizerKind::kYear: {
      auto y = leading_number(group(rule.args[0]));
      return y ? date(PartialDate::of(*y)) : n;
    }
    case NormalizerKind::kDecade: {
      const std::string &g = group(rule.args[0]);
      auto v = leading_number(g);
      if (!v) return n;
      int start = g.size() <= 2 ? config.decade_pivot + *v : *v / 10 * 10;
      return period(PartialDate::of(start), PartialDate::of(start + 9));
    }
    case NormalizerKind::kRange: {
      auto b = parse_date_text(group(rule.args[0]));
      auto e = parse_date_text(group(rule.args[1]));
      if (!b || !e) return n;
      return period(*b, *e);
    }
    case NormalizerKind::kDctDays:
      if (!dct || dct->granularity() != Granularity::kDay) {
        n.outcome = Outcome::kNeedsDct;
        return n;
      }
      return date(add_days(*dct, rule.args[0]));
    case NormalizerKind::kDctMonths: {
      if (!dct || dct->granularity() == Granularity::kYear) {
        n.outcome = Outcome::kNeedsDct;
        return n;
      }
      int index = dct->year * 12 + (dct->month - 1) + rule.args[0];
      return date(PartialDate::of(index / 12, index % 12 + 1));
    }
    case NormalizerKind::kDctYears:
      if (!dct) {
        n.outcome = Outcome::kNeedsDct;
        return n;
      }
      return date(PartialDate::of(dct->year + rule.args[0]));
    case NormalizerKind::kDiscard:
      n.outcome = Outcome::kDiscard;
      return n;
  }
  return n;
}

bool rule_applies(const TemporalRule &rule, Language doc_language) {
  if (rule.language == Language::kUnknown) return true;
  if (doc_language == Language::kMixed || doc_language == Language::kUnknown) return true;
  return rule.language == doc_language;
}

}  // namespace

TemporalResult annotate_temporal_detailed(const DocumentRecord &doc, const TemporalRules &rules,
                                          const TemporalConfig &config) {
  TemporalResult result;
  const std::string &text = doc.abstract;
  if (text.empty()) return result;
  const std::u32string cps = to_u32(text);
  const OffsetMap offsets(text);

  auto boundary_ok = [&](std::size_t byte_begin, std::size_t byte_end) {
    std::size_t b = offsets.to_cp(byte_begin);
    std::size_t e = offsets.to_cp(byte_end);
    if (b > 0 && is_alnum(cps[b - 1]) && is_alnum(cps[b])) return false;
    if (e < cps.size() && e > 0 && is_alnum(cps[e]) && is_alnum(cps[e - 1])) return false;
    return true;
  };

  struct Scored {
    Match match;
    Normalized value;
  };
  std::vector<Scored> found;
  for (std::size_t r = 0; r < rules.rules().size(); ++r) {
    const TemporalRule &rule = rules.rules()[r];
    if (!rule_applies(rule, doc.language)) continue;
    std::size_t pos = 0;
    std::smatch m;
    while (pos < text.size()) {
      auto flags = pos > 0 ? std::regex_constants::match_prev_avail : std::regex_constants::match_default;
      if (!std::regex_search(text.begin() + static_cast<std::ptrdiff_t>(pos), text.end(), m, rule.regex, flags)) break;
      std::size_t b = pos + static_cast<std::size_t>(m.position(0));
      std::size_t e = b + static_cast<std::size_t>(m.length(0));
      if (e > b && boundary_ok(b, e)) {
        Match match{b, e, r, {}};
        for (std::size_t k = 0; k < m.size(); ++k) match.groups.push_back(m[k].str());
        Normalized value = normalize(rule, match, doc.creation_date, config);
        if (value.outcome != Outcome::kInvalid) found.push_back({std::move(match), value});
        pos = e;
      } else {
        // Retry from the next code point.
        pos = b + 1;
        while (pos < text.size() && (static_cast<unsigned char>(text[pos]) & 0xC0) == 0x80) ++pos;
      }
    }
  }

  std::stable_sort(found.begin(), found.end(), [](const Scored &a, const Scored &b) {
    std::size_t la = a.match.end - a.match.begin, lb = b.match.end - b.match.begin;
    if (la != lb) return la > lb;
    if (a.match.begin != b.match.begin) return a.match.begin < b.match.begin;
    return a.match.rule < b.match.rule;
  });
  std::vector<const Scored *> kept;
  for (const auto &s : found) {
    bool overlaps = std::any_of(kept.begin(), kept.end(), [&](const Scored *k) {
      return s.match.begin < k->match.end && k->match.begin < s.match.end;
    });
    if (!overlaps) kept.push_back(&s);
  }
  std::sort(kept.begin(), kept.end(), [](const Scored *a, const Scored *b) { return a->match.begin < b->match.begin; });

  for (const Scored *s : kept) {
    std::string surface = text.substr(s->match.begin, s->match.end - s->match.begin);
    std::size_t start = offsets.to_cp(s->match.begin);
    if (s->value.outcome == Outcome::kNeedsDct) {
      result.warnings.push_back("RelativeWithoutDct: '" + surface + "' at " + std::to_string(start) +
                                " needs a creation date precise enough to resolve");
      continue;
    }
    if (s->value.outcome != Outcome::kKeep) continue;
    TemporalAnnotation a;
    a.span = {start, offsets.to_cp(s->match.end)};
    a.surface_text = std::move(surface);
    a.timex_class = s->value.timex_class;
    a.value_begin = s->value.begin;
    a.value_end = s->value.end;
    result.annotations.push_back(std::move(a));
  }
  return result;
}

std::vector<TemporalAnnotation> annotate_temporal(const DocumentRecord &doc, const TemporalRules &rules,
                                                  const TemporalConfig &config) {
  return annotate_temporal_detailed(doc, rules, config).annotations;
}

}  // namespace geoscope
