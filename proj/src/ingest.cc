#include "geoscope/ingest.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "crosswalk_embedded.h"
#include "geoscope/error.h"
#include "geoscope/language.h"
#include "geoscope/text.h"
#include "geoscope/xml.h"

namespace geoscope {

namespace {

constexpr std::string_view kDcNs = "http://purl.org/dc/elements/1.1/";
constexpr std::string_view kDctermsNs = "http://purl.org/dc/terms/";
constexpr std::string_view kRdfNs = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
constexpr std::string_view kBiboNs = "http://purl.org/ontology/bibo/";
constexpr std::string_view kXmlNs = "http://www.w3.org/XML/1998/namespace";

const std::set<std::string> kTargets = {"doc_id", "source", "title", "abstract", "creation_date", "language"};

struct Element {
  const xml::Node *node;
  std::vector<std::string> path;
  std::string path_str;
};

void collect(const xml::Node &node, std::vector<std::string> &path, std::vector<Element> &out) {
  for (const auto &child : node.children) {
    path.push_back(canonical_name(child.ns, child.local, child.name));
    std::string joined;
    for (const auto &p : path) joined += (joined.empty() ? "" : "/") + p;
    out.push_back({&child, path, joined});
    collect(child, path, out);
    path.pop_back();
  }
}

bool path_matches(const std::vector<std::string> &pattern, const std::vector<std::string> &path) {
  if (pattern.size() != path.size()) return false;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (pattern[i] != "*" && pattern[i] != path[i]) return false;
  }
  return true;
}

std::optional<std::string> canonical_attr(const xml::Node &node, std::string_view name) {
  for (const auto &a : node.attributes) {
    if (canonical_name(a.ns, a.local, a.name) == name) return a.value;
  }
  return std::nullopt;
}

bool is_thesis_record(const xml::Node &node) {
  if (node.ns == kBiboNs && node.local == "Thesis") return true;
  if (node.ns == kDctermsNs && node.local == "dateAccepted") return true;
  if (node.ns == "http://id.loc.gov/vocabulary/relators/" && node.local == "ths") return true;
  if (node.ns == kRdfNs && node.local == "type") {
    auto res = node.attr_ns(kRdfNs, "resource");
    if (res && res->find("Thesis") != std::string::npos) return true;
  }
  if (node.ns == kDcNs && node.local == "type") {
    std::string t = fold(node.text);
    if (t.find("these") != std::string::npos || t.find("thesis") != std::string::npos) return true;
  }
  return std::any_of(node.children.begin(), node.children.end(), is_thesis_record);
}

void count_leaves(const xml::Node &node, std::size_t &dc, std::size_t &total) {
  for (const auto &c : node.children) {
    if (c.is_leaf()) {
      ++total;
      if (c.ns == kDcNs || c.ns == kDctermsNs) ++dc;
    } else {
      count_leaves(c, dc, total);
    }
  }
}

const xml::Node &record_root(const xml::Node &root, SourceFormat format) {
  if (format == SourceFormat::kMods && root.local == "modsCollection") {
    for (const auto &c : root.children) {
      if (c.local == "mods") return c;
    }
    throw MalformedInput("modsCollection without a mods record");
  }
  return root;
}

std::string fallback_id(const SourceFile &file) {
  if (!file.path.empty()) return std::filesystem::path(file.path).stem().string();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : file.bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "doc-%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

std::string to_string(SourceFormat f) {
  switch (f) {
    case SourceFormat::kMods: return "mods";
    case SourceFormat::kDcXml: return "dc_xml";
    case SourceFormat::kRdf: return "rdf";
    case SourceFormat::kUnknown: return "unknown";
  }
  return "unknown";
}

std::optional<SourceFormat> source_format_from_string(std::string_view s) {
  if (s == "mods") return SourceFormat::kMods;
  if (s == "dc_xml" || s == "dc") return SourceFormat::kDcXml;
  if (s == "rdf") return SourceFormat::kRdf;
  return std::nullopt;
}

std::string canonical_name(std::string_view ns, std::string_view local, std::string_view written) {
  static const std::vector<std::pair<std::string_view, std::string_view>> kPrefixes = {
      {kDcNs, "dc"},
      {kDctermsNs, "dcterms"},
      {kRdfNs, "rdf"},
      {kBiboNs, "bibo"},
      {"http://xmlns.com/foaf/0.1/", "foaf"},
      {"http://id.loc.gov/vocabulary/relators/", "marcrel"},
      {kXmlNs, "xml"},
  };
  if (ns.empty() || ns == kModsNamespace) return std::string(local);
  for (const auto &[uri, prefix] : kPrefixes) {
    if (uri == ns) return std::string(prefix) + ":" + std::string(local);
  }
  return std::string(written);
}

SourceFile SourceFile::read(const std::filesystem::path &path, std::optional<SourceFormat> declared) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MalformedInput("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  SourceFile f{path.string(), declared, ss.str()};
  if (f.bytes.empty()) throw MalformedInput(path.string() + " is empty");
  return f;
}

Crosswalk Crosswalk::parse(std::string_view markdown) {
  Crosswalk cw;
  std::istringstream in{std::string(markdown)};
  std::string line;
  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (t.size() < 2 || t.front() != '|') continue;
    auto cells = split(std::string_view(t).substr(1, t.size() - 2), '|');
    if (cells.size() != 3) continue;
    for (auto &c : cells) c = trim(c);
    if (cells[0] == "format" || cells[0].find_first_not_of("-: ") == std::string::npos) continue;
    auto format = source_format_from_string(cells[0]);
    if (!format) throw ResourceError("crosswalk: unknown format '" + cells[0] + "'");
    if (!kTargets.count(cells[2])) throw ResourceError("crosswalk: unknown target '" + cells[2] + "'");
    cw.rules_.push_back({*format, cells[1], cells[2]});
  }
  return cw;
}

Crosswalk Crosswalk::load(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw ResourceError("cannot read crosswalk " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

const Crosswalk &Crosswalk::shipped() {
  static const Crosswalk cw = parse(embedded::kCrosswalk.front().text);
  return cw;
}

std::vector<CrosswalkRule> Crosswalk::rules_for(SourceFormat format) const {
  std::vector<CrosswalkRule> out;
  std::copy_if(rules_.begin(), rules_.end(), std::back_inserter(out),
               [&](const CrosswalkRule &r) { return r.format == format; });
  return out;
}

SourceFormat detect_format(const SourceFile &file) {
  xml::Document doc;
  try {
    doc = xml::parse(file.bytes);
  } catch (const MalformedXml &e) {
    throw MalformedInput((file.path.empty() ? std::string("input") : file.path) + " is not XML: " + e.what());
  }
  const xml::Node &root = doc.root;
  if (root.ns == kModsNamespace && (root.local == "mods" || root.local == "modsCollection")) {
    return SourceFormat::kMods;
  }
  if (root.ns == kRdfNs && root.local == "RDF") {
    return is_thesis_record(root) ? SourceFormat::kRdf : SourceFormat::kUnknown;
  }
  std::size_t dc = 0, total = 0;
  count_leaves(root, dc, total);
  if (total > 0 && dc * 2 > total) return SourceFormat::kDcXml;
  return SourceFormat::kUnknown;
}

DocumentRecord normalize(const SourceFile &file, const Crosswalk &crosswalk, std::vector<std::string> *warnings) {
  SourceFormat format = file.declared_format ? *file.declared_format : detect_format(file);
  if (format == SourceFormat::kUnknown) {
    throw MalformedInput((file.path.empty() ? std::string("input") : file.path) + ": unknown source format");
  }
  xml::Document doc;
  try {
    doc = xml::parse(file.bytes);
  } catch (const MalformedXml &e) {
    throw MalformedInput(e.what());
  }
  const xml::Node &root = record_root(doc.root, format);
  std::vector<Element> elements;
  std::vector<std::string> path;
  collect(root, path, elements);

  std::set<const xml::Node *> consumed;
  std::set<std::string> filled;
  std::vector<std::string> abstracts;
  std::vector<std::string> abstract_langs;
  std::optional<std::string> declared_language;
  DocumentRecord record;
  auto warn = [&](const std::string &w) {
    if (warnings) warnings->push_back(w);
  };

  for (const auto &rule : crosswalk.rules_for(format)) {
    const std::string &target = rule.target;
    if (target != "abstract" && filled.count(target)) continue;

    std::optional<std::string> value;
    if (!rule.path.empty() && rule.path.front() == '=') {
      value = trim(rule.path.substr(1));
    } else {
      auto segments = split(rule.path, '/');
      std::optional<std::string> attribute;
      if (!segments.empty() && !segments.back().empty() && segments.back().front() == '@') {
        attribute = segments.back().substr(1);
        segments.pop_back();
      }
      for (const auto &e : elements) {
        if (consumed.count(e.node) || !path_matches(segments, e.path)) continue;
        if (attribute) {
          auto v = canonical_attr(*e.node, *attribute);
          if (v && !trim(*v).empty()) {
            value = trim(*v);
            break;
          }
          continue;
        }
        if (!e.node->is_leaf()) continue;
        std::string text = trim(e.node->text);
        if (text.empty()) continue;
        if (target == "abstract") {
          consumed.insert(e.node);
          abstracts.push_back(text);
          auto lang = e.node->attr_ns(kXmlNs, "lang");
          if (!lang) lang = e.node->attr("lang");
          if (lang) abstract_langs.push_back(*lang);
          continue;
        }
        if (target == "creation_date") {
          auto date = parse_date_text(text);
          if (!date) {
            warn("MalformedDate: '" + text + "' at " + e.path_str + " is not a recognizable date");
            filled.insert(target);
            break;
          }
          record.creation_date = date;
        }
        consumed.insert(e.node);
        value = text;
        break;
      }
    }
    if (!value || target == "abstract") continue;
    filled.insert(target);
    if (target == "doc_id") record.doc_id = *value;
    if (target == "source") record.source = source_from_string(*value);
    if (target == "title") record.title = *value;
    if (target == "language") declared_language = *value;
  }

  if (record.title.empty()) {
    throw MissingRequiredField((file.path.empty() ? std::string("input") : file.path) + ": no title");
  }
  if (record.doc_id.empty()) record.doc_id = fallback_id(file);
  for (const auto &a : abstracts) record.abstract += (record.abstract.empty() ? "" : "\n\n") + a;

  Language content = detect_language(record.abstract);
  std::set<Language> tagged;
  for (const auto &l : abstract_langs) tagged.insert(language_from_string(l));
  LanguageProfile profile = language_profile(record.abstract);
  bool tagged_bilingual = tagged.count(Language::kFr) && tagged.count(Language::kEn) &&
                          profile.fr_share > 0 && profile.en_share > 0;
  if (content == Language::kMixed || tagged_bilingual) {
    record.language = Language::kMixed;
  } else if (declared_language && language_from_string(*declared_language) != Language::kUnknown) {
    record.language = language_from_string(*declared_language);
  } else if (tagged.size() == 1 && *tagged.begin() != Language::kUnknown) {
    record.language = *tagged.begin();
  } else {
    record.language = content;
  }

  for (const auto &e : elements) {
    if (!e.node->is_leaf() || consumed.count(e.node)) continue;
    std::string text = trim(e.node->text);
    if (!text.empty()) record.extra_metadata.emplace_back(e.path_str, text);
  }
  return record;
}

}  // namespace geoscope
