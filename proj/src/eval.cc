#include "geoscope/eval.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <unordered_map>
#include <utility>

#include "json.hpp"

#include "geoscope/error.h"
#include "geoscope/text.h"

namespace geoscope {

namespace {

std::size_t parse_offset(const std::string &field, std::size_t line) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
    throw MalformedInput("gold line " + std::to_string(line) + ": bad offset '" + field + "'");
  }
  return v;
}

bool spans_match(const EvalSpan &gold, const EvalSpan &sys, MatchMode mode) {
  if (gold.kind != sys.kind) return false;
  if (mode == MatchMode::kExact) return gold.start == sys.start && gold.end == sys.end;
  return gold.start < sys.end && sys.start < gold.end;
}

std::string pad(const std::string &s, std::size_t width) {
  std::size_t n = code_point_length(s);
  return n >= width ? s : s + std::string(width - n, ' ');
}

}  // namespace

bool valid_eval_kind(std::string_view dimension, std::string_view kind) {
  if (dimension == "spatial") return kind == "ESA" || kind == "ESR" || kind == "organization";
  if (dimension == "temporal") return kind == "date" || kind == "period";
  if (dimension == "thematic") return kind == "concept";
  return false;
}

GoldCorpus GoldCorpus::parse(std::string_view tsv) {
  GoldCorpus g;
  std::set<EvalSpan> seen;
  std::size_t line_no = 0;
  bool first_row = true;
  for (std::string line : split(tsv, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line.front() == '#') continue;
    auto f = split(line, '\t');
    if (std::exchange(first_row, false) && !f.empty() && f[0] == "doc_id") continue;
    if (f.size() != 5) {
      throw MalformedInput("gold line " + std::to_string(line_no) + ": expected 5 tab-separated columns");
    }
    EvalSpan s{trim(f[0]), parse_offset(trim(f[1]), line_no), parse_offset(trim(f[2]), line_no), trim(f[3]), trim(f[4])};
    if (s.doc_id.empty()) throw MalformedInput("gold line " + std::to_string(line_no) + ": empty doc_id");
    if (s.end <= s.start) throw MalformedInput("gold line " + std::to_string(line_no) + ": empty or inverted span");
    if (!valid_eval_kind(s.dimension, s.kind)) {
      throw MalformedInput("gold line " + std::to_string(line_no) + ": kind '" + s.kind + "' is not a " +
                           s.dimension + " kind");
    }
    if (!seen.insert(s).second) throw MalformedInput("gold line " + std::to_string(line_no) + ": duplicate span");
    g.spans.push_back(std::move(s));
  }
  return g;
}

GoldCorpus GoldCorpus::load(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MalformedInput("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string GoldCorpus::to_tsv() const {
  std::string out = "doc_id\tstart\tend\tdimension\tkind\n";
  for (const auto &s : spans) {
    out += s.doc_id + '\t' + std::to_string(s.start) + '\t' + std::to_string(s.end) + '\t' + s.dimension + '\t' +
           s.kind + '\n';
  }
  return out;
}

void check_gold_bounds(const GoldCorpus &gold, const std::vector<DocumentRecord> &documents) {
  std::unordered_map<std::string, std::size_t> lengths;
  for (const auto &d : documents) lengths[d.doc_id] = code_point_length(d.abstract);
  for (const auto &s : gold.spans) {
    auto it = lengths.find(s.doc_id);
    if (it == lengths.end()) throw InvariantViolation("gold span names unknown document " + s.doc_id);
    if (s.end > it->second) {
      throw InvariantViolation("gold span [" + std::to_string(s.start) + "," + std::to_string(s.end) +
                               ") lies outside the abstract of " + s.doc_id);
    }
  }
}

std::vector<EvalSpan> system_spans(const AnnotatedDocument &doc, const std::vector<SpatialAnnotation> &organizations) {
  std::vector<EvalSpan> out;
  const std::string &id = doc.record.doc_id;
  for (const auto &a : doc.spatial) out.push_back({id, a.span.start, a.span.end, "spatial", to_string(a.kind)});
  for (const auto &a : organizations) out.push_back({id, a.span.start, a.span.end, "spatial", "organization"});
  for (const auto &a : doc.temporal) {
    out.push_back({id, a.span.start, a.span.end, "temporal", a.timex_class == TimexClass::kDate ? "date" : "period"});
  }
  for (const auto &a : doc.thematic) out.push_back({id, a.span.start, a.span.end, "thematic", "concept"});
  return out;
}

std::string to_string(MatchMode mode) { return mode == MatchMode::kExact ? "exact" : "overlap"; }

double EvalCounts::precision() const { return tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0; }
double EvalCounts::recall() const { return tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0; }
double EvalCounts::f_measure() const { return geoscope::f_measure(precision(), recall()); }

EvalCounts &EvalCounts::operator+=(const EvalCounts &o) {
  tp += o.tp;
  fp += o.fp;
  fn += o.fn;
  return *this;
}

double f_measure(double precision, double recall) {
  return precision + recall > 0 ? 2 * precision * recall / (precision + recall) : 0.0;
}

EvalCounts EvalReport::dimension(std::string_view dimension) const {
  EvalCounts total;
  if (auto it = by_kind.find(std::string(dimension)); it != by_kind.end()) {
    for (const auto &[kind, c] : it->second) total += c;
  }
  return total;
}

EvalCounts EvalReport::kinds(std::string_view dimension, const std::vector<std::string> &kinds) const {
  EvalCounts total;
  auto it = by_kind.find(std::string(dimension));
  if (it == by_kind.end()) return total;
  for (const auto &k : kinds) {
    if (auto c = it->second.find(k); c != it->second.end()) total += c->second;
  }
  return total;
}

EvalReport evaluate(const std::vector<EvalSpan> &system, const GoldCorpus &gold, MatchMode mode) {
  EvalReport report;
  report.mode = mode;
  // Spans grouped per document and dimension, in left-to-right order.
  using Key = std::pair<std::string, std::string>;
  std::map<Key, std::vector<EvalSpan>> sys_groups, gold_groups;
  for (const auto &s : system) sys_groups[{s.doc_id, s.dimension}].push_back(s);
  for (const auto &s : gold.spans) gold_groups[{s.doc_id, s.dimension}].push_back(s);
  std::set<Key> keys;
  for (const auto &[k, v] : sys_groups) keys.insert(k);
  for (const auto &[k, v] : gold_groups) keys.insert(k);

  for (const auto &key : keys) {
    auto &sys = sys_groups[key];
    auto &gs = gold_groups[key];
    std::sort(sys.begin(), sys.end());
    std::sort(gs.begin(), gs.end());
    auto &counts = report.by_kind[key.second];
    std::vector<bool> used(sys.size(), false);
    for (const auto &g : gs) {
      bool matched = false;
      for (std::size_t i = 0; i < sys.size() && !matched; ++i) {
        if (!used[i] && spans_match(g, sys[i], mode)) used[i] = matched = true;
      }
      (matched ? counts[g.kind].tp : counts[g.kind].fn)++;
    }
    for (std::size_t i = 0; i < sys.size(); ++i) {
      if (!used[i]) counts[sys[i].kind].fp++;
    }
  }
  return report;
}

std::string format_percent(double ratio) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", std::round(ratio * 1000.0) / 10.0);
  std::string s = buf;
  if (s.size() > 2 && s.compare(s.size() - 2, 2, ".0") == 0) s.resize(s.size() - 2);
  std::replace(s.begin(), s.end(), '.', ',');
  return s + "%";
}

std::string format_ratio(double ratio) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", ratio);
  return buf;
}

std::string EvalReport::render_table() const {
  std::ostringstream out;
  out << "mode: " << to_string(mode) << '\n';
  for (const auto &[dim, kinds] : by_kind) {
    std::vector<std::pair<std::string, EvalCounts>> columns(kinds.begin(), kinds.end());
    columns.emplace_back(dim, dimension(dim));
    const std::size_t w0 = 11, w = 13;
    out << '\n' << pad("", w0);
    for (const auto &[name, c] : columns) out << pad(name, w);
    out << '\n';
    auto row = [&](const char *label, auto value) {
      out << pad(label, w0);
      for (const auto &[name, c] : columns) out << pad(value(c), w);
      out << '\n';
    };
    row("Précision", [](const EvalCounts &c) { return format_percent(c.precision()); });
    row("Rappel", [](const EvalCounts &c) { return format_percent(c.recall()); });
    row("F-mesure", [](const EvalCounts &c) { return format_percent(c.f_measure()); });
    row("tp/fp/fn", [](const EvalCounts &c) {
      return std::to_string(c.tp) + "/" + std::to_string(c.fp) + "/" + std::to_string(c.fn);
    });
  }
  return out.str();
}

std::string EvalReport::to_json() const {
  auto counts_json = [](const EvalCounts &c) {
    return nlohmann::json{{"tp", c.tp},
                          {"fp", c.fp},
                          {"fn", c.fn},
                          {"precision", c.precision()},
                          {"recall", c.recall()},
                          {"f_measure", c.f_measure()}};
  };
  nlohmann::json j;
  j["mode"] = to_string(mode);
  j["dimensions"] = nlohmann::json::object();
  for (const auto &[dim, kinds] : by_kind) {
    nlohmann::json d;
    d["total"] = counts_json(dimension(dim));
    for (const auto &[kind, c] : kinds) d["kinds"][kind] = counts_json(c);
    j["dimensions"][dim] = d;
  }
  return j.dump(2);
}

}  // namespace geoscope
