#include "gold_markup.h"

#include <fstream>
#include <sstream>

#include "geoscope/error.h"
#include "geoscope/pipeline.h"
#include "geoscope/text.h"

namespace geoscope {

namespace {

std::string kind_dimension(const std::string &kind) {
  for (const char *dim : {"spatial", "temporal", "thematic"}) {
    if (valid_eval_kind(dim, kind)) return dim;
  }
  return {};
}

// Strips the markers of one abstract, recording their spans.
std::string strip_markers(const std::string &text, const std::string &doc_id, std::size_t line,
                          std::vector<EvalSpan> &spans) {
  std::string out;
  std::size_t pos = 0;
  auto fail = [&](const std::string &what) {
    throw MalformedInput("gold markup line " + std::to_string(line) + " (" + doc_id + "): " + what);
  };
  while (pos < text.size()) {
    std::size_t open = text.find("[[", pos);
    if (open == std::string::npos) {
      out += text.substr(pos);
      break;
    }
    out += text.substr(pos, open - pos);
    std::size_t close = text.find("]]", open);
    if (close == std::string::npos) fail("unclosed marker");
    std::string body = text.substr(open + 2, close - open - 2);
    std::size_t colon = body.find(':');
    if (colon == std::string::npos || body.find("[[") != std::string::npos) fail("bad marker '" + body + "'");
    std::string kind = body.substr(0, colon);
    std::string surface = body.substr(colon + 1);
    std::string dim = kind_dimension(kind);
    if (dim.empty()) fail("unknown kind '" + kind + "'");
    if (trim(surface) != surface || surface.empty()) fail("marker text must be non-empty and trimmed");
    std::size_t start = code_point_length(out);
    out += surface;
    spans.push_back({doc_id, start, code_point_length(out), dim, kind});
    pos = close + 2;
  }
  if (out.find("]]") != std::string::npos) fail("stray ']]'");
  return out;
}

}  // namespace

GoldFixture parse_gold_markup(std::string_view markup) {
  GoldFixture fx;
  std::vector<std::string> lines = split(markup, '\n');
  std::size_t i = 0;
  while (i < lines.size()) {
    std::string line = lines[i];
    if (trim(line).empty() || line.front() == '#') {
      ++i;
      continue;
    }
    const std::size_t header_line = i + 1;
    if (line.rfind("@@", 0) != 0) {
      throw MalformedInput("gold markup line " + std::to_string(header_line) + ": expected an '@@' header");
    }
    auto fields = split(line.substr(2), '|');
    if (fields.size() != 4) {
      throw MalformedInput("gold markup line " + std::to_string(header_line) + ": header needs 4 '|' fields");
    }
    DocumentRecord r;
    r.doc_id = trim(fields[0]);
    r.language = language_from_string(trim(fields[1]));
    r.creation_date = PartialDate::parse_iso(trim(fields[2]));
    r.title = trim(fields[3]);
    r.source = Source::kOther;
    if (r.doc_id.empty() || r.title.empty() || !r.creation_date || r.language == Language::kUnknown) {
      throw MalformedInput("gold markup line " + std::to_string(header_line) + ": bad header");
    }
    std::string abstract;
    for (++i; i < lines.size() && !trim(lines[i]).empty(); ++i) {
      abstract += (abstract.empty() ? "" : " ") + trim(lines[i]);
    }
    std::vector<EvalSpan> spans;
    r.abstract = strip_markers(abstract, r.doc_id, header_line, spans);
    for (auto &s : spans) fx.gold.spans.push_back(std::move(s));
    check_invariants(r);
    fx.documents.push_back(std::move(r));
  }
  // Reuses the TSV validation: kinds, duplicates, empty spans.
  fx.gold = GoldCorpus::parse(fx.gold.to_tsv());
  check_gold_bounds(fx.gold, fx.documents);
  return fx;
}

GoldFixture load_gold_markup(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MalformedInput("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_gold_markup(ss.str());
}

void write_gold_fixture(const GoldFixture &fixture, const std::filesystem::path &dir) {
  std::filesystem::create_directories(dir / "corpus");
  for (const auto &r : fixture.documents) {
    std::ofstream(dir / "corpus" / (document_file_name(r.doc_id) + ".xml"), std::ios::binary)
        << serialize_mods_ti(AnnotatedDocument{r, {}, {}, {}});
  }
  std::ofstream(dir / "gold.tsv", std::ios::binary)
      << "# Generated from markup.txt by geoscope_goldgen. Offsets are code points.\n"
      << fixture.gold.to_tsv();
}

}  // namespace geoscope
