#include "geoscope/thematic.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "geoscope/error.h"
#include "geoscope/language.h"
#include "geoscope/text.h"
#include "geoscope/xml.h"

namespace geoscope {

namespace {

constexpr std::string_view kSkosNs = "http://www.w3.org/2004/02/skos/core#";
constexpr std::string_view kRdfNs = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
constexpr std::string_view kXmlNs = "http://www.w3.org/XML/1998/namespace";

bool is_concept(const xml::Node &n) {
  if (n.ns == kSkosNs && n.local == "Concept") return true;
  if (n.ns == kRdfNs && n.local == "Description") {
    for (const auto &c : n.children) {
      if (c.ns == kRdfNs && c.local == "type") {
        auto r = c.attr_ns(kRdfNs, "resource");
        if (r && *r == std::string(kSkosNs) + "Concept") return true;
      }
    }
  }
  return false;
}

void collect_concepts(const xml::Node &n, std::vector<const xml::Node *> &out) {
  for (const auto &c : n.children) {
    if (is_concept(c)) {
      out.push_back(&c);
    } else {
      collect_concepts(c, out);
    }
  }
}

std::string lang_of(const xml::Node &n) {
  auto l = n.attr_ns(kXmlNs, "lang");
  if (!l) return "";
  std::string code = to_lower(trim(*l));
  if (auto dash = code.find('-'); dash != std::string::npos) code.resize(dash);
  return code;
}

// Same per-word normalization as label_key, applied to one token so that an
// elision such as "l'" keeps its apostrophe.
std::string word_key(std::string_view word) {
  std::string w = fold(word);
  if (code_point_length(w) > 3 && (w.back() == 's' || w.back() == 'x')) w.pop_back();
  return w;
}

}  // namespace

Thesaurus Thesaurus::load_skos(std::string_view text) {
  xml::Document doc;
  try {
    doc = xml::parse(text);
  } catch (const MalformedXml &e) {
    throw MalformedSkos(std::string("not well-formed XML: ") + e.what());
  }
  const xml::Node &root = doc.root;
  bool rdf_root = root.ns == kRdfNs && root.local == "RDF";
  bool scheme_root = root.ns == kSkosNs && root.local == "ConceptScheme";
  if (!rdf_root && !scheme_root) throw MalformedSkos("root element " + root.name + " is not rdf:RDF");

  std::vector<const xml::Node *> nodes;
  collect_concepts(root, nodes);

  Thesaurus t;
  for (const xml::Node *n : nodes) {
    ThesaurusConcept c;
    auto about = n->attr_ns(kRdfNs, "about");
    if (!about || trim(*about).empty()) {
      throw MalformedSkos("concept at line " + std::to_string(n->line) + " has no rdf:about");
    }
    c.uri = trim(*about);
    for (const auto &child : n->children) {
      if (child.ns != kSkosNs) continue;
      std::string label = collapse_whitespace(child.text);
      if (child.local == "prefLabel") {
        if (label.empty()) throw MalformedSkos(c.uri + ": empty prefLabel");
        if (!c.pref_labels.emplace(lang_of(child), label).second) {
          throw MalformedSkos(c.uri + ": two prefLabels for language '" + lang_of(child) + "'");
        }
      } else if (child.local == "altLabel") {
        if (!label.empty()) c.alt_labels[lang_of(child)].push_back(label);
      } else if (child.local == "broader") {
        auto res = child.attr_ns(kRdfNs, "resource");
        if (!res || trim(*res).empty()) throw MalformedSkos(c.uri + ": skos:broader without rdf:resource");
        // Polyhierarchy is reduced to the first parent.
        if (!c.broader_uri) c.broader_uri = trim(*res);
      }
    }
    if (c.pref_labels.empty()) throw MalformedSkos(c.uri + ": concept has no prefLabel");
    if (!t.by_uri_.emplace(c.uri, t.concepts_.size()).second) throw MalformedSkos(c.uri + ": duplicate concept");
    t.concepts_.push_back(std::move(c));
  }

  for (const auto &c : t.concepts_) {
    if (c.broader_uri && !t.by_uri_.count(*c.broader_uri)) {
      throw MalformedSkos(c.uri + ": broader concept " + *c.broader_uri + " is not defined");
    }
  }
  for (const auto &c : t.concepts_) {
    std::vector<std::string> path{c.uri};
    for (auto p = c.broader_uri; p; p = t.concepts_[t.by_uri_.at(*p)].broader_uri) {
      auto seen = static_cast<std::size_t>(std::find(path.begin(), path.end(), *p) - path.begin());
      path.push_back(*p);
      if (seen + 1 != path.size()) {
        std::string cycle;
        for (std::size_t k = seen; k < path.size(); ++k) cycle += (cycle.empty() ? "" : " -> ") + path[k];
        throw CyclicBroader("broader cycle: " + cycle);
      }
    }
  }
  t.build_index();
  return t;
}

Thesaurus Thesaurus::load(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ResourceError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return load_skos(ss.str());
}

void Thesaurus::build_index() {
  for (std::size_t i = 0; i < concepts_.size(); ++i) {
    auto add = [&](const std::string &lang, const std::string &label) {
      std::string key = label_key(label);
      if (key.empty()) return;
      auto &ids = index_[lang][key];
      if (ids.empty() || ids.back() != i) ids.push_back(i);
      max_label_tokens_ = std::max(max_label_tokens_, static_cast<std::size_t>(std::count(key.begin(), key.end(), ' ') + 1));
    };
    for (const auto &[lang, label] : concepts_[i].pref_labels) add(lang, label);
    for (const auto &[lang, labels] : concepts_[i].alt_labels) {
      for (const auto &l : labels) add(lang, l);
    }
  }
  for (auto &[lang, keys] : index_) {
    for (auto &[key, ids] : keys) {
      std::sort(ids.begin(), ids.end(), [&](std::size_t a, std::size_t b) { return concepts_[a].uri < concepts_[b].uri; });
      ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    }
  }
}

const ThesaurusConcept *Thesaurus::find(std::string_view uri) const {
  auto it = by_uri_.find(std::string(uri));
  return it == by_uri_.end() ? nullptr : &concepts_[it->second];
}

std::vector<const ThesaurusConcept *> Thesaurus::broader_chain(std::string_view uri) const {
  std::vector<const ThesaurusConcept *> out;
  const ThesaurusConcept *c = find(uri);
  while (c && c->broader_uri) {
    c = find(*c->broader_uri);
    if (c) out.push_back(c);
  }
  return out;
}

std::string Thesaurus::pref_label(const ThesaurusConcept &c, std::string_view language) {
  for (std::string_view l : {language, std::string_view("en"), std::string_view("fr"), std::string_view("")}) {
    if (auto it = c.pref_labels.find(std::string(l)); it != c.pref_labels.end()) return it->second;
  }
  return c.pref_labels.begin()->second;
}

std::vector<const ThesaurusConcept *> Thesaurus::lookup(std::string_view key, std::string_view language) const {
  std::vector<std::size_t> ids;
  for (std::string_view l : {language, std::string_view("")}) {
    auto lang = index_.find(std::string(l));
    if (lang == index_.end()) continue;
    auto it = lang->second.find(std::string(key));
    if (it != lang->second.end()) ids.insert(ids.end(), it->second.begin(), it->second.end());
    if (l.empty()) break;
  }
  std::sort(ids.begin(), ids.end(), [&](std::size_t a, std::size_t b) { return concepts_[a].uri < concepts_[b].uri; });
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  std::vector<const ThesaurusConcept *> out;
  for (std::size_t i : ids) out.push_back(&concepts_[i]);
  return out;
}

// ---------------------------------------------------------------------------
// Annotation

namespace {

struct Region {
  std::size_t start = 0;  // code points
  std::size_t end = 0;
  std::vector<std::string> languages;
};

std::vector<Region> matching_regions(const DocumentRecord &doc) {
  std::size_t length = code_point_length(doc.abstract);
  switch (doc.language) {
    case Language::kFr: return {{0, length, {"fr"}}};
    case Language::kEn: return {{0, length, {"en"}}};
    case Language::kUnknown: return {{0, length, {"fr", "en"}}};
    case Language::kMixed: break;
  }
  std::vector<Region> out;
  for (const auto &seg : language_segments(doc.abstract)) {
    if (seg.language == Language::kFr) {
      out.push_back({seg.start, seg.end, {"fr"}});
    } else if (seg.language == Language::kEn) {
      out.push_back({seg.start, seg.end, {"en"}});
    } else {
      out.push_back({seg.start, seg.end, {"fr", "en"}});
    }
  }
  return out;
}

}  // namespace

std::vector<ConceptMatch> match_concepts(const DocumentRecord &doc, const Thesaurus &thesaurus) {
  std::vector<ConceptMatch> found;
  if (doc.abstract.empty() || thesaurus.concepts().empty()) return found;
  const std::vector<Token> tokens = tokenize(doc.abstract);
  std::vector<std::string> keys;
  keys.reserve(tokens.size());
  for (const auto &t : tokens) keys.push_back(t.type == TokenType::kPunct ? std::string() : word_key(t.text));

  struct Candidate {
    std::size_t first = 0;  // token indices, half-open
    std::size_t last = 0;
    ConceptMatch match;
  };
  std::vector<Candidate> candidates;
  for (const Region &region : matching_regions(doc)) {
    auto begin = std::lower_bound(tokens.begin(), tokens.end(), region.start,
                                  [](const Token &t, std::size_t pos) { return t.begin < pos; });
    std::size_t lo = static_cast<std::size_t>(begin - tokens.begin());
    std::size_t hi = lo;
    while (hi < tokens.size() && tokens[hi].end <= region.end) ++hi;
    for (std::size_t i = lo; i < hi; ++i) {
      std::string key;
      for (std::size_t n = 1; n <= thesaurus.max_label_tokens() && i + n <= hi; ++n) {
        const std::string &w = keys[i + n - 1];
        if (w.empty()) break;  // matches never cross punctuation
        key += (n > 1 ? " " : "") + w;
        for (const auto &lang : region.languages) {
          auto concepts = thesaurus.lookup(key, lang);
          if (concepts.empty()) continue;
          ConceptMatch m;
          m.span = {tokens[i].begin, tokens[i + n - 1].end};
          m.surface_text = substr_cp(doc.abstract, m.span.start, m.span.end);
          m.concept_ptr = concepts.front();
          m.language = lang;
          candidates.push_back({i, i + n, std::move(m)});
          break;
        }
      }
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate &a, const Candidate &b) {
    if (a.match.span.length() != b.match.span.length()) return a.match.span.length() > b.match.span.length();
    return a.match.span.start < b.match.span.start;
  });
  for (auto &c : candidates) {
    bool overlaps = std::any_of(found.begin(), found.end(),
                                [&](const ConceptMatch &k) { return k.span.overlaps(c.match.span); });
    if (!overlaps) found.push_back(std::move(c.match));
  }
  std::sort(found.begin(), found.end(), [](const ConceptMatch &a, const ConceptMatch &b) { return a.span < b.span; });
  return found;
}

std::vector<ThematicAnnotation> enrich_concepts(const std::vector<ConceptMatch> &matches, const Thesaurus &thesaurus) {
  std::vector<ThematicAnnotation> out;
  out.reserve(matches.size());
  for (const auto &m : matches) {
    const ThesaurusConcept &c = *m.concept_ptr;
    ThematicAnnotation a;
    a.span = m.span;
    a.surface_text = m.surface_text;
    a.concept_uri = c.uri;
    a.pref_label = Thesaurus::pref_label(c, m.language);
    // A label matched in a language without its own prefLabel is still a
    // used-for form of the concept.
    for (const auto &[lang, labels] : c.alt_labels) {
      for (const auto &l : labels) {
        if (std::find(a.used_for.begin(), a.used_for.end(), l) == a.used_for.end()) a.used_for.push_back(l);
      }
    }
    std::string key = label_key(a.surface_text);
    bool covered = label_key(a.pref_label) == key ||
                   std::any_of(a.used_for.begin(), a.used_for.end(), [&](const auto &l) { return label_key(l) == key; });
    if (!covered) {
      for (const auto &[lang, label] : c.pref_labels) {
        if (label_key(label) == key) a.used_for.push_back(label);
      }
    }
    for (const ThesaurusConcept *b : thesaurus.broader_chain(c.uri)) {
      a.broader.push_back({b->uri, Thesaurus::pref_label(*b, m.language)});
    }
    out.push_back(std::move(a));
  }
  return out;
}

std::vector<ThematicAnnotation> annotate_thematic(const DocumentRecord &doc, const Thesaurus &thesaurus) {
  return enrich_concepts(match_concepts(doc, thesaurus), thesaurus);
}

// ---------------------------------------------------------------------------
// C-value

std::vector<std::vector<std::string>> term_chunks(std::string_view abstract, Language language) {
  std::vector<std::vector<std::string>> chunks;
  std::vector<std::string> current;
  auto flush = [&] {
    if (!current.empty()) chunks.push_back(std::move(current));
    current.clear();
  };
  for (const auto &t : tokenize(abstract)) {
    if (t.type != TokenType::kWord || is_elision(fold(t.text))) {
      flush();
      continue;
    }
    std::string folded = fold(t.text);
    bool stop = false;
    if (language == Language::kFr || language == Language::kEn) {
      stop = is_stopword(folded, language);
    } else {
      stop = is_stopword(folded, Language::kFr) || is_stopword(folded, Language::kEn);
    }
    if (stop) {
      flush();
      continue;
    }
    current.push_back(to_lower(t.text));
  }
  flush();
  return chunks;
}

std::vector<TermCandidate> extract_terms_cvalue(const std::vector<std::string> &corpus, Language language) {
  if (std::all_of(corpus.begin(), corpus.end(), [](const std::string &a) { return trim(a).empty(); })) {
    throw EmptyCorpus("term extraction needs at least one non-empty abstract");
  }
  struct Stats {
    std::size_t frequency = 0;
    std::size_t length = 0;
    std::set<std::size_t> documents;
  };
  std::map<std::string, Stats> stats;
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    for (const auto &chunk : term_chunks(corpus[d], language)) {
      for (std::size_t i = 0; i < chunk.size(); ++i) {
        std::string surface;
        for (std::size_t n = 1; n <= kMaxTermWords && i + n <= chunk.size(); ++n) {
          surface += (n > 1 ? " " : "") + chunk[i + n - 1];
          Stats &s = stats[surface];
          ++s.frequency;
          s.length = n;
          s.documents.insert(d);
        }
      }
    }
  }
  if (stats.empty()) throw EmptyCorpus("no term candidates in the corpus");

  // T_a: for every candidate b, each shorter contiguous sub-sequence a gains b.
  std::map<std::string, std::set<std::string>> containing;
  for (const auto &[surface, s] : stats) {
    if (s.length < 2) continue;
    auto words = split(surface, ' ');
    for (std::size_t n = 1; n < words.size(); ++n) {
      for (std::size_t i = 0; i + n <= words.size(); ++i) {
        std::string sub;
        for (std::size_t k = i; k < i + n; ++k) sub += (k > i ? " " : "") + words[k];
        containing[sub].insert(surface);
      }
    }
  }

  const double n_docs = static_cast<double>(corpus.size());
  std::vector<TermCandidate> out;
  out.reserve(stats.size());
  for (const auto &[surface, s] : stats) {
    TermCandidate t;
    t.surface = surface;
    t.frequency = s.frequency;
    t.length_words = s.length;
    t.document_frequency = s.documents.size();
    double weight = std::log2(static_cast<double>(s.length) + 1.0);
    double f = static_cast<double>(s.frequency);
    if (auto it = containing.find(surface); it != containing.end() && !it->second.empty()) {
      t.nested_in.assign(it->second.begin(), it->second.end());
      double sum = 0;
      for (const auto &b : it->second) sum += static_cast<double>(stats.at(b).frequency);
      t.c_value = weight * (f - sum / static_cast<double>(it->second.size()));
    } else {
      t.c_value = weight * f;
    }
    t.tf_idf = f * std::log(n_docs / static_cast<double>(t.document_frequency));
    out.push_back(std::move(t));
  }
  std::sort(out.begin(), out.end(), [](const TermCandidate &a, const TermCandidate &b) {
    if (a.c_value != b.c_value) return a.c_value > b.c_value;
    if (a.frequency != b.frequency) return a.frequency > b.frequency;
    return a.surface < b.surface;
  });
  return out;
}

}  // namespace geoscope
