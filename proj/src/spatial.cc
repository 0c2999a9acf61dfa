#include "geoscope/spatial.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "geoscope/error.h"
#include "geoscope/language.h"
#include "geoscope/text.h"

namespace geoscope {

std::string phrase_key(std::string_view text) { return collapse_whitespace(fold(text)); }

// ---------------------------------------------------------------------------
// Gazetteer

namespace {

std::string read_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ResourceError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <typename T>
T parse_number(const std::string &s, std::size_t line, const char *column) {
  T value{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ResourceError("gazetteer line " + std::to_string(line) + ": bad " + column + " '" + s + "'");
  }
  return value;
}

GazetteerName parse_name(const std::string &item) {
  auto at = item.rfind('@');
  if (at != std::string::npos && at > 0) {
    std::string lang = item.substr(at + 1);
    bool code = !lang.empty() && lang.size() <= 3 &&
                std::all_of(lang.begin(), lang.end(), [](char c) { return c >= 'a' && c <= 'z'; });
    if (code) return {trim(item.substr(0, at)), lang};
  }
  return {item, ""};
}

}  // namespace

Gazetteer::Gazetteer(std::vector<GazetteerEntry> entries) : entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto &e = entries_[i];
    if (e.gazetteer_id.empty()) throw ResourceError("gazetteer entry without id");
    if (e.names.empty()) throw ResourceError("gazetteer entry " + e.gazetteer_id + " has no name");
    if (e.latitude < -90 || e.latitude > 90 || e.longitude < -180 || e.longitude > 180) {
      throw ResourceError("gazetteer entry " + e.gazetteer_id + " has coordinates out of range");
    }
    if (!by_id_.emplace(e.gazetteer_id, i).second) {
      throw ResourceError("duplicate gazetteer id " + e.gazetteer_id);
    }
    max_population_ = std::max(max_population_, e.population);
  }
  for (const auto &e : entries_) {
    if (e.admin_parent && !by_id_.count(*e.admin_parent)) {
      throw ResourceError("gazetteer entry " + e.gazetteer_id + " has unknown parent " + *e.admin_parent);
    }
    std::set<std::string> seen{e.gazetteer_id};
    for (auto p = e.admin_parent; p; p = entries_[by_id_.at(*p)].admin_parent) {
      if (!seen.insert(*p).second) throw ResourceError("gazetteer parent cycle through " + *p);
    }
  }
  std::vector<std::size_t> order(entries_.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return entries_[a].gazetteer_id < entries_[b].gazetteer_id; });
  for (std::size_t i : order) {
    std::set<std::string> keys;
    for (const auto &n : entries_[i].names) {
      std::string key = phrase_key(n.name);
      if (key.empty() || !keys.insert(key).second) continue;
      names_[key].push_back(i);
      max_name_tokens_ = std::max(max_name_tokens_, tokenize(n.name).size());
    }
  }
}

Gazetteer Gazetteer::parse(std::string_view tsv) {
  std::vector<GazetteerEntry> entries;
  std::istringstream in{std::string(tsv)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line.front() == '#' || line.rfind("id\t", 0) == 0) continue;
    auto cols = split(line, '\t');
    if (cols.size() != 9) {
      throw ResourceError("gazetteer line " + std::to_string(line_no) + ": expected 9 columns, got " +
                          std::to_string(cols.size()));
    }
    GazetteerEntry e;
    e.gazetteer_id = trim(cols[0]);
    if (!trim(cols[1]).empty()) e.names.push_back({trim(cols[1]), ""});
    for (const auto &alt : split(cols[2], '|')) {
      std::string item = trim(alt);
      if (!item.empty()) e.names.push_back(parse_name(item));
    }
    e.latitude = parse_number<double>(trim(cols[3]), line_no, "latitude");
    e.longitude = parse_number<double>(trim(cols[4]), line_no, "longitude");
    auto fc = feature_class_from_string(trim(cols[5]));
    if (!fc) throw ResourceError("gazetteer line " + std::to_string(line_no) + ": bad feature class '" + cols[5] + "'");
    e.feature_class = *fc;
    e.country_code = trim(cols[6]);
    std::string pop = trim(cols[7]);
    e.population = pop.empty() ? 0 : parse_number<std::uint64_t>(pop, line_no, "population");
    std::string parent = trim(cols[8]);
    if (!parent.empty()) e.admin_parent = parent;
    entries.push_back(std::move(e));
  }
  return Gazetteer(std::move(entries));
}

Gazetteer Gazetteer::load(const std::filesystem::path &path) { return parse(read_file(path)); }

const GazetteerEntry *Gazetteer::find(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  return it == by_id_.end() ? nullptr : &entries_[it->second];
}

std::vector<const GazetteerEntry *> Gazetteer::lookup(std::string_view name) const {
  std::vector<const GazetteerEntry *> out;
  auto it = names_.find(phrase_key(name));
  if (it == names_.end()) return out;
  for (std::size_t i : it->second) out.push_back(&entries_[i]);
  return out;
}

std::vector<const GazetteerEntry *> Gazetteer::ancestors(std::string_view id) const {
  std::vector<const GazetteerEntry *> out;
  const GazetteerEntry *e = find(id);
  while (e && e->admin_parent) {
    e = find(*e->admin_parent);
    if (e) out.push_back(e);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Lexicon

LanguageLexicon SpatialLexicon::parse_language(std::string_view text) {
  LanguageLexicon lex;
  std::istringstream in{std::string(text)};
  std::string line, category, subtype;
  std::size_t line_no = 0;
  auto fail = [&](const std::string &msg) {
    throw ResourceError("lexicon line " + std::to_string(line_no) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (t.front() == '[') {
      if (t.back() != ']') fail("unterminated header");
      std::string header = t.substr(1, t.size() - 2);
      auto colon = header.find(':');
      category = trim(header.substr(0, colon));
      subtype = colon == std::string::npos ? "" : trim(header.substr(colon + 1));
      if (category == "feature_nouns" && !feature_class_from_string(subtype)) fail("unknown feature class " + subtype);
      if (category == "indicators" && !indicator_from_string(subtype)) fail("unknown indicator " + subtype);
      static const std::set<std::string> kCategories = {"feature_nouns", "indicators", "action_verbs", "stop_titles",
                                                        "adverbs"};
      if (!kCategories.count(category)) fail("unknown category " + category);
      continue;
    }
    if (category.empty()) fail("entry before any category header");
    std::string key = phrase_key(t);
    if (category == "feature_nouns") {
      lex.feature_nouns[key] = *feature_class_from_string(subtype);
    } else if (category == "indicators") {
      lex.indicators[key] = *indicator_from_string(subtype);
    } else if (category == "action_verbs") {
      lex.action_verbs.insert(key);
    } else if (category == "stop_titles") {
      lex.stop_titles.insert(key);
    } else {
      lex.adverbs.insert(key);
    }
    lex.max_phrase_tokens = std::max(lex.max_phrase_tokens, tokenize(t).size());
  }
  return lex;
}

SpatialLexicon::SpatialLexicon(LanguageLexicon fr, LanguageLexicon en) : fr_(std::move(fr)), en_(std::move(en)) {
  for (const auto *lex : {&fr_, &en_}) {
    for (Indicator ind : {Indicator::kOrientation, Indicator::kDistance, Indicator::kAdjacency, Indicator::kInclusion,
                          Indicator::kGeometricFigure}) {
      bool present = std::any_of(lex->indicators.begin(), lex->indicators.end(),
                                 [&](const auto &kv) { return kv.second == ind; });
      if (!present) {
        throw ResourceError(std::string(lex == &fr_ ? "fr" : "en") + " lexicon has no " + to_string(ind) +
                            " indicator");
      }
    }
  }
}

SpatialLexicon SpatialLexicon::load(const std::filesystem::path &dir) {
  return SpatialLexicon(parse_language(read_file(dir / "lexicon_fr.txt")),
                        parse_language(read_file(dir / "lexicon_en.txt")));
}

const LanguageLexicon &SpatialLexicon::of(Language language) const {
  if (language == Language::kFr) return fr_;
  if (language == Language::kEn) return en_;
  throw UnsupportedLanguage("no spatial lexicon for language " + to_string(language));
}

// ---------------------------------------------------------------------------
// Extraction

namespace {

const std::set<std::string> kEsrSkip = {"de", "du", "des", "d'", "la", "le", "les", "l'", "of", "the"};
const std::set<std::string> kGeometricPair = {"entre", "between"};
const std::set<std::string> kPairConjunction = {"et", "and"};
const std::set<std::string> kPairArticles = {"le", "la", "les", "l'", "the"};

struct TokenSpan {
  std::size_t begin = 0;  // token indices, half-open
  std::size_t end = 0;
};

struct RawEntity {
  TokenSpan tokens;
  std::optional<TokenSpan> feature_noun;
};

class Grammar {
 public:
  Grammar(std::string_view text, Language language, const LanguageLexicon &lex, const Gazetteer &gaz)
      : text_(text), offsets_(text), tokens_(tokenize(text)), language_(language), lex_(lex), gaz_(gaz) {
    folded_.reserve(tokens_.size());
    for (const auto &t : tokens_) folded_.push_back(fold(t.text));
  }

  std::vector<SpatialAnnotation> run() {
    std::vector<RawEntity> esas = absolute_entities();
    std::vector<SpatialAnnotation> out;
    std::size_t floor = 0;  // an indicator may not reach into the previous entity
    for (std::size_t k = 0; k < esas.size(); ++k) {
      const RawEntity &esa = esas[k];
      SpatialAnnotation ann = make_esa(esa);
      if (auto esr = relative_start(esa.tokens.begin, floor)) {
        std::size_t end = esa.tokens.end;
        if (kGeometricPair.count(key(esr->first.begin, esr->first.end)) && k + 1 < esas.size()) {
          std::size_t t = esa.tokens.end;
          if (t < tokens_.size() && kPairConjunction.count(folded_[t])) {
            ++t;
            if (t < tokens_.size() && kPairArticles.count(folded_[t])) ++t;
            if (esas[k + 1].tokens.begin == t) end = esas[k + 1].tokens.end;
          }
        }
        SpatialAnnotation rel;
        rel.span = {tokens_[esr->first.begin].begin, tokens_[end - 1].end};
        rel.surface_text = slice(rel.span.start, rel.span.end);
        rel.kind = SpatialKind::kESR;
        rel.indicator = esr->second;
        rel.anchor = AnchorRef{ann.span, ann.surface_text, ann.feature_noun};
        out.push_back(std::move(rel));
      } else {
        out.push_back(std::move(ann));
      }
      floor = esa.tokens.end;
    }
    return out;
  }

 private:
  std::string slice(std::size_t cp_begin, std::size_t cp_end) const {
    std::size_t b = offsets_.to_byte(cp_begin);
    return std::string(text_.substr(b, offsets_.to_byte(cp_end) - b));
  }

  std::string key(std::size_t i, std::size_t j) const {
    if (i >= j || j > tokens_.size()) return {};
    return phrase_key(slice(tokens_[i].begin, tokens_[j - 1].end));
  }

  bool is_word(std::size_t i) const { return i < tokens_.size() && tokens_[i].type == TokenType::kWord; }

  // Longest lexicon phrase starting at token i, in tokens.
  template <typename Map>
  std::size_t phrase_at(const Map &map, std::size_t i) const {
    if (!is_word(i)) return 0;
    for (std::size_t n = std::min(lex_.max_phrase_tokens, tokens_.size() - i); n > 0; --n) {
      if (map.count(key(i, i + n))) return n;
    }
    return 0;
  }

  // Tokens used by a connector ("de", "de la", "of the", ...) at i.
  std::size_t connector_at(std::size_t i) const {
    if (i >= tokens_.size()) return 0;
    const std::string &f = folded_[i];
    auto next = [&](std::size_t k) -> std::string { return k < folded_.size() ? folded_[k] : std::string(); };
    if (language_ == Language::kFr) {
      if (f == "de") return (next(i + 1) == "la" || next(i + 1) == "l'") ? 2 : 1;
      if (f == "du" || f == "des" || f == "d'") return 1;
    } else {
      if (f == "of") return next(i + 1) == "the" ? 2 : 1;
    }
    return 0;
  }

  bool is_name_token(std::size_t i) const {
    if (!is_word(i) || !starts_upper(tokens_[i].text) || is_elision(folded_[i])) return false;
    const std::string &f = folded_[i];
    if (is_stopword(f, Language::kFr) || is_stopword(f, Language::kEn)) return false;
    return !lex_.feature_nouns.count(f) && !lex_.indicators.count(f) && !lex_.stop_titles.count(f);
  }

  // Longest gazetteer name starting at i.
  std::size_t gazetteer_at(std::size_t i) const {
    if (!is_word(i) || !starts_upper(tokens_[i].text)) return 0;
    for (std::size_t n = std::min(gaz_.max_name_tokens(), tokens_.size() - i); n > 0; --n) {
      if (is_word(i + n - 1) && gaz_.contains_name(key(i, i + n))) return n;
    }
    return 0;
  }

  struct ProperName {
    TokenSpan run;
    bool run_in_gazetteer = false;
    std::size_t gazetteer_end = 0;  // end of the longest gazetteer name at run.begin, 0 if none
  };

  // Capitalized run at i; French runs may contain connectors between names.
  std::optional<ProperName> proper_name_at(std::size_t i) const {
    std::size_t g = gazetteer_at(i);
    std::size_t j = i;
    if (is_name_token(i)) {
      j = i + 1;
      while (true) {
        if (is_name_token(j)) {
          ++j;
        } else if (std::size_t c = connector_at(j); c && language_ == Language::kFr && is_name_token(j + c)) {
          j += c + 1;
        } else {
          break;
        }
      }
    }
    if (j == i && g == 0) return std::nullopt;
    ProperName pn{{i, j}, false, g ? i + g : 0};
    if (j > i) {
      pn.run_in_gazetteer = gaz_.contains_name(key(i, j));
      // Sentence-initial capitals carry no evidence unless the run is a known name.
      if (tokens_[i].sentence_start && j - i > 1 && !pn.run_in_gazetteer && g == 0) {
        pn.run.begin = i + 1;
        pn.run_in_gazetteer = gaz_.contains_name(key(i + 1, j));
        if (std::size_t g2 = gazetteer_at(i + 1)) pn.gazetteer_end = i + 1 + g2;
      }
    }
    if (g >= j - i) {
      pn.run = {i, i + g};
      pn.run_in_gazetteer = true;
    }
    return pn;
  }

  // True when the name is the object of an institution title
  // ("Université de Montpellier", "Montpellier University").
  bool titled(const TokenSpan &name) const {
    std::size_t b = name.begin;
    for (std::size_t c = 0; c <= 2; ++c) {
      if (b < c + 1) break;
      if ((c == 0 || connector_at(b - c) == c) && lex_.stop_titles.count(folded_[b - c - 1])) return true;
    }
    return name.end < tokens_.size() && lex_.stop_titles.count(folded_[name.end]);
  }

  std::optional<TokenSpan> edge_feature_noun(const TokenSpan &name) const {
    if (name.end - name.begin < 2) return std::nullopt;
    for (std::size_t n = std::min(lex_.max_phrase_tokens, name.end - name.begin - 1); n > 0; --n) {
      if (lex_.feature_nouns.count(key(name.end - n, name.end))) return TokenSpan{name.end - n, name.end};
      if (lex_.feature_nouns.count(key(name.begin, name.begin + n))) return TokenSpan{name.begin, name.begin + n};
    }
    return std::nullopt;
  }

  // FeatureNoun [connector] ProperName at i.
  std::optional<RawEntity> feature_noun_entity(std::size_t i) const {
    std::size_t f = phrase_at(lex_.feature_nouns, i);
    if (f == 0) return std::nullopt;
    std::size_t j = i + f;
    for (std::size_t c : {connector_at(j), std::size_t{0}}) {
      auto pn = proper_name_at(j + c);
      if (pn && pn->run.begin == j + c && !titled(pn->run)) return RawEntity{{i, pn->run.end}, TokenSpan{i, j}};
    }
    return std::nullopt;
  }

  std::vector<RawEntity> absolute_entities() const {
    std::vector<RawEntity> out;
    std::size_t i = 0;
    while (i < tokens_.size()) {
      // FeatureNoun [connector] ProperName
      if (auto esa = feature_noun_entity(i)) {
        out.push_back(*esa);
        i = esa->tokens.end;
        continue;
      }
      if (auto pn = proper_name_at(i)) {
        TokenSpan name = pn->run;
        if (!titled(name)) {
          // English ProperName FeatureNoun+
          std::size_t k = name.end;
          if (language_ == Language::kEn) {
            while (std::size_t f = phrase_at(lex_.feature_nouns, k)) k += f;
          }
          if (k > name.end) {
            out.push_back({{name.begin, k}, TokenSpan{name.end, k}});
            i = k;
            continue;
          }
          if (pn->run_in_gazetteer) {
            out.push_back({name, edge_feature_noun(name)});
            i = name.end;
            continue;
          }
          if (pn->gazetteer_end) {
            TokenSpan known{name.begin, pn->gazetteer_end};
            out.push_back({known, edge_feature_noun(known)});
            i = known.end;
            continue;
          }
        }
        i = std::max(name.end, i + 1);
        continue;
      }
      ++i;
    }
    return out;
  }

  // Indicator phrase preceding an entity starting at token b. Up to two
  // connectors or articles may separate them; the widest phrase wins.
  std::optional<std::pair<TokenSpan, Indicator>> relative_start(std::size_t b, std::size_t floor) const {
    std::optional<std::pair<TokenSpan, Indicator>> best;
    std::size_t p = b;
    for (std::size_t skip = 0; skip <= 2; ++skip) {
      if (skip > 0) {
        if (p == floor || !kEsrSkip.count(folded_[p - 1])) break;
        --p;
      }
      for (std::size_t n = std::min(lex_.max_phrase_tokens, p - floor); n > 0; --n) {
        auto it = lex_.indicators.find(key(p - n, p));
        if (it == lex_.indicators.end()) continue;
        std::size_t q = p - n;
        if (it->second == Indicator::kDistance && q > floor && tokens_[q - 1].type == TokenType::kNumber) --q;
        if (!best || q < best->first.begin) best = std::make_pair(TokenSpan{q, p}, it->second);
        break;
      }
    }
    return best;
  }

  SpatialAnnotation make_esa(const RawEntity &e) const {
    SpatialAnnotation ann;
    ann.span = {tokens_[e.tokens.begin].begin, tokens_[e.tokens.end - 1].end};
    ann.surface_text = slice(ann.span.start, ann.span.end);
    ann.kind = SpatialKind::kESA;
    if (e.feature_noun) {
      ann.feature_noun = slice(tokens_[e.feature_noun->begin].begin, tokens_[e.feature_noun->end - 1].end);
    }
    return ann;
  }

  std::string_view text_;
  OffsetMap offsets_;
  std::vector<Token> tokens_;
  std::vector<std::string> folded_;
  Language language_;
  const LanguageLexicon &lex_;
  const Gazetteer &gaz_;
};

bool span_less(const SpatialAnnotation &a, const SpatialAnnotation &b) { return a.span < b.span; }

}  // namespace

std::vector<SpatialAnnotation> extract_spatial_candidates(std::string_view abstract, Language language,
                                                          const SpatialLexicon &lexicon, const Gazetteer &gazetteer) {
  if (language == Language::kFr || language == Language::kEn) {
    auto out = Grammar(abstract, language, lexicon.of(language), gazetteer).run();
    std::sort(out.begin(), out.end(), span_less);
    return out;
  }
  if (language != Language::kMixed) {
    throw UnsupportedLanguage("spatial extraction needs fr, en or mixed, got " + to_string(language));
  }
  auto fr = Grammar(abstract, Language::kFr, lexicon.of(Language::kFr), gazetteer).run();
  auto en = Grammar(abstract, Language::kEn, lexicon.of(Language::kEn), gazetteer).run();
  struct Tagged {
    SpatialAnnotation ann;
    int grammar;
  };
  std::vector<Tagged> pool;
  for (auto &a : fr) pool.push_back({std::move(a), 0});
  for (auto &a : en) pool.push_back({std::move(a), 1});
  std::stable_sort(pool.begin(), pool.end(), [](const Tagged &a, const Tagged &b) {
    if (a.ann.span.length() != b.ann.span.length()) return a.ann.span.length() > b.ann.span.length();
    return a.ann.span.start < b.ann.span.start;
  });
  std::vector<Tagged> kept;
  for (auto &t : pool) {
    bool clash = std::any_of(kept.begin(), kept.end(), [&](const Tagged &k) {
      return k.ann.span == t.ann.span || (k.grammar != t.grammar && k.ann.span.overlaps(t.ann.span));
    });
    if (!clash) kept.push_back(std::move(t));
  }
  std::vector<SpatialAnnotation> out;
  for (auto &t : kept) out.push_back(std::move(t.ann));
  std::sort(out.begin(), out.end(), span_less);
  return out;
}

OrganizationFilterResult filter_organizations(std::vector<SpatialAnnotation> candidates, std::string_view abstract,
                                              Language language, const SpatialLexicon &lexicon) {
  OrganizationFilterResult result;
  if (candidates.empty()) return result;
  std::vector<const LanguageLexicon *> lexicons;
  if (language == Language::kFr || language == Language::kEn) {
    lexicons.push_back(&lexicon.of(language));
  } else {
    lexicons = {&lexicon.of(Language::kFr), &lexicon.of(Language::kEn)};
  }
  auto in_any = [&](const std::string &word, auto member) {
    return std::any_of(lexicons.begin(), lexicons.end(), [&](const LanguageLexicon *l) { return (l->*member).count(word); });
  };
  std::vector<Token> tokens = tokenize(abstract);
  for (auto &c : candidates) {
    auto t = std::lower_bound(tokens.begin(), tokens.end(), c.span.end,
                              [](const Token &tok, std::size_t pos) { return tok.begin < pos; });
    bool organization = false;
    for (std::size_t counted = 0; t != tokens.end() && counted < 3 && t->type != TokenType::kPunct; ++t) {
      std::string f = fold(t->text);
      if (in_any(f, &LanguageLexicon::adverbs)) continue;
      if (in_any(f, &LanguageLexicon::action_verbs)) {
        organization = true;
        break;
      }
      ++counted;
    }
    (organization ? result.organizations : result.kept).push_back(std::move(c));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Resolution

Resolver::Resolver(const Gazetteer &gazetteer, const SpatialLexicon &lexicon, ResolverWeights weights)
    : gazetteer_(gazetteer), lexicon_(lexicon), weights_(weights) {}

namespace {

const std::set<std::string> kNameConnectors = {"de", "du", "des", "d'", "la", "l'", "of", "the"};

struct EntityView {
  std::string surface;
  std::optional<std::string> feature_noun;
};

EntityView entity_of(const SpatialAnnotation &c) {
  if (c.anchor) return {c.anchor->surface_text, c.anchor->feature_noun};
  return {c.surface_text, c.feature_noun};
}

}  // namespace

std::vector<std::string> Resolver::candidate_names(const SpatialAnnotation &candidate) const {
  EntityView v = entity_of(candidate);
  std::vector<std::string> names{v.surface};
  if (!v.feature_noun) return names;
  auto tokens = tokenize(v.surface);
  std::size_t fn_tokens = tokenize(*v.feature_noun).size();
  if (fn_tokens == 0 || fn_tokens >= tokens.size()) return names;
  std::string fn_key = phrase_key(*v.feature_noun);
  auto key_of = [&](std::size_t i, std::size_t j) {
    return phrase_key(substr_cp(v.surface, tokens[i].begin, tokens[j - 1].end));
  };
  std::size_t b = 0, e = tokens.size();
  if (key_of(0, fn_tokens) == fn_key) {
    b = fn_tokens;
    while (b < e && kNameConnectors.count(fold(tokens[b].text))) ++b;
  } else if (key_of(e - fn_tokens, e) == fn_key) {
    e -= fn_tokens;
  }
  if (b < e && (b > 0 || e < tokens.size())) names.push_back(substr_cp(v.surface, tokens[b].begin, tokens[e - 1].end));
  return names;
}

std::optional<FeatureClass> Resolver::feature_noun_class(const SpatialAnnotation &candidate) const {
  auto fn = entity_of(candidate).feature_noun;
  if (!fn) return std::nullopt;
  std::string key = phrase_key(*fn);
  for (Language l : {Language::kFr, Language::kEn}) {
    const auto &nouns = lexicon_.of(l).feature_nouns;
    if (auto it = nouns.find(key); it != nouns.end()) return it->second;
  }
  return std::nullopt;
}

std::string Resolver::modal_country(const std::vector<SpatialAnnotation> &context) {
  std::map<std::string, int> counts;
  for (const auto &c : context) {
    if (c.resolution && !c.resolution->country_code.empty()) ++counts[c.resolution->country_code];
  }
  std::string best;
  int best_count = 0;
  for (const auto &[code, n] : counts) {
    if (n > best_count) {
      best = code;
      best_count = n;
    }
  }
  return best;
}

std::vector<ScoredEntry> Resolver::score(const SpatialAnnotation &candidate,
                                         const std::vector<SpatialAnnotation> &context) const {
  std::vector<const GazetteerEntry *> matches;
  for (const auto &name : candidate_names(candidate)) {
    matches = gazetteer_.lookup(name);
    if (!matches.empty()) break;
  }
  std::vector<ScoredEntry> out;
  if (matches.empty()) return out;
  std::optional<FeatureClass> wanted = feature_noun_class(candidate);
  std::string modal = modal_country(context);
  double log_max = std::log1p(static_cast<double>(gazetteer_.max_population()));
  for (const GazetteerEntry *e : matches) {
    double s = 0;
    if (wanted && *wanted == e->feature_class) s += weights_.feature_class;
    if (!modal.empty() && e->country_code == modal) s += weights_.context_country;
    if (log_max > 0) s += weights_.population * std::log1p(static_cast<double>(e->population)) / log_max;
    out.push_back({e, std::clamp(s, 0.0, 1.0)});
  }
  std::sort(out.begin(), out.end(), [](const ScoredEntry &a, const ScoredEntry &b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.entry->population != b.entry->population) return a.entry->population > b.entry->population;
    return a.entry->gazetteer_id < b.entry->gazetteer_id;
  });
  return out;
}

std::optional<GazetteerResolution> Resolver::resolve(const SpatialAnnotation &candidate,
                                                     const std::vector<SpatialAnnotation> &context) const {
  auto scored = score(candidate, context);
  if (scored.empty()) return std::nullopt;
  const GazetteerEntry &e = *scored.front().entry;
  return GazetteerResolution{e.gazetteer_id, e.canonical_name(), e.latitude, e.longitude,
                             e.feature_class, e.country_code,    scored.front().score};
}

SpatialResult annotate_spatial_detailed(const DocumentRecord &doc, const Gazetteer &gazetteer,
                                        const SpatialLexicon &lexicon, ResolverWeights weights) {
  SpatialResult result;
  if (doc.abstract.empty()) return result;
  Language language = doc.language == Language::kUnknown ? Language::kMixed : doc.language;
  auto candidates = extract_spatial_candidates(doc.abstract, language, lexicon, gazetteer);
  auto filtered = filter_organizations(std::move(candidates), doc.abstract, language, lexicon);
  result.organizations = std::move(filtered.organizations);

  Resolver resolver(gazetteer, lexicon, weights);
  std::vector<SpatialAnnotation> &out = result.annotations;
  out = std::move(filtered.kept);
  std::vector<bool> done(out.size(), false);
  std::vector<SpatialAnnotation> context;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (resolver.score(out[i], {}).size() == 1) {
      out[i].resolution = resolver.resolve(out[i], {});
      done[i] = true;
      context.push_back(out[i]);
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!done[i]) out[i].resolution = resolver.resolve(out[i], context);
  }
  std::sort(out.begin(), out.end(), span_less);
  out.erase(std::unique(out.begin(), out.end(), [](const auto &a, const auto &b) { return a.span == b.span; }),
            out.end());
  return result;
}

std::vector<SpatialAnnotation> annotate_spatial(const DocumentRecord &doc, const Gazetteer &gazetteer,
                                                const SpatialLexicon &lexicon, ResolverWeights weights) {
  return annotate_spatial_detailed(doc, gazetteer, lexicon, weights).annotations;
}

}  // namespace geoscope
