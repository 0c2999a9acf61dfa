// geoscope: command-line front end for ingest, annotation runs, search,
// term extraction, evaluation and the REST service.

#include <algorithm>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "geoscope/corpus_model.h"
#include "geoscope/error.h"
#include "geoscope/eval.h"
#include "geoscope/index.h"
#include "geoscope/ingest.h"
#include "geoscope/pipeline.h"
#include "geoscope/service.h"
#include "geoscope/text.h"
#include "geoscope/thematic.h"

namespace fs = std::filesystem;
using namespace geoscope;

namespace {

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw MalformedInput("cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

PipelineConfig load_config(const std::string &path) {
  return path.empty() ? PipelineConfig{} : PipelineConfig::load(path);
}

std::optional<PartialDate> parse_date(const std::string &text, const char *flag) {
  if (text.empty()) return std::nullopt;
  auto d = PartialDate::parse_iso(text);
  if (!d) throw InvalidQuery(std::string(flag) + ": expected YYYY, YYYY-MM or YYYY-MM-DD, got '" + text + "'");
  return d;
}

BoundingBox parse_bbox(const std::string &text) {
  auto parts = split(text, ',');
  if (parts.size() != 4) throw InvalidQuery("--bbox: expected min_lat,min_lon,max_lat,max_lon");
  double v[4];
  for (int i = 0; i < 4; ++i) {
    try {
      std::size_t used = 0;
      v[i] = std::stod(parts[i], &used);
      if (used != parts[i].size()) throw std::invalid_argument(parts[i]);
    } catch (const std::exception &) {
      throw InvalidQuery("--bbox: bad number '" + parts[i] + "'");
    }
  }
  return {v[0], v[1], v[2], v[3]};
}

// MODS-TI records from a directory, a single record or a collection file.
std::vector<AnnotatedDocument> read_annotated(const fs::path &path) {
  std::vector<AnnotatedDocument> docs;
  for (const auto &file : corpus_files(path)) {
    std::string xml = slurp(file);
    if (xml.find("<!DOCTYPE modsCollection") != std::string::npos) {
      for (auto &d : parse_mods_ti_collection(xml)) docs.push_back(std::move(d));
    } else {
      docs.push_back(parse_mods_ti(xml));
    }
  }
  return docs;
}

int cmd_ingest(const std::string &input, const std::string &out, const std::string &format_name) {
  std::optional<SourceFormat> format;
  if (!format_name.empty()) {
    format = source_format_from_string(format_name);
    if (!format) throw MalformedInput("unknown format '" + format_name + "'");
  }
  fs::create_directories(out);
  std::map<std::string, int> used;
  std::size_t ok = 0, failed = 0;
  for (const auto &path : corpus_files(input)) {
    try {
      std::vector<std::string> warnings;
      DocumentRecord r = normalize(SourceFile::read(path, format), Crosswalk::shipped(), &warnings);
      check_invariants(r);
      for (const auto &w : warnings) std::cerr << path.string() << ": warning: " << w << '\n';
      std::string name = document_file_name(r.doc_id);
      if (int n = used[name]++; n > 0) name += "-" + std::to_string(n + 1);
      std::ofstream(fs::path(out) / (name + ".xml"), std::ios::binary) << serialize_mods_ti({r, {}, {}, {}});
      ++ok;
    } catch (const Error &e) {
      std::cerr << path.string() << ": " << e.what() << '\n';
      ++failed;
    }
  }
  std::cout << "ingested " << ok << " document(s), " << failed << " failed\n";
  return failed ? 1 : 0;
}

int cmd_run(const std::string &corpus, const std::string &resources_dir, const std::string &out,
            const std::string &config_path) {
  PipelineConfig config = load_config(config_path);
  Resources resources = Resources::load(resources_dir);
  PipelineResult result = run_pipeline(fs::path(corpus), resources, config);
  write_pipeline_output(result, out);
  std::cout << result.manifest.render();
  return result.manifest.failures.empty() ? 0 : 1;
}

int cmd_search(const std::string &index_path, const std::string &resources_dir, const std::string &place,
               const std::string &bbox, const std::string &from, const std::string &to,
               const std::string &concept_text, bool expand, const std::string &config_path) {
  PipelineConfig config = load_config(config_path);
  std::optional<Resources> resources;
  if (!resources_dir.empty()) resources = Resources::load(resources_dir);
  Query q;
  if (!place.empty() || !bbox.empty()) {
    q.place = PlaceClause{};
    if (!place.empty()) q.place->name = place;
    if (!bbox.empty()) q.place->bbox = parse_bbox(bbox);
  }
  if (!from.empty() || !to.empty()) q.period = PeriodClause{parse_date(from, "--from"), parse_date(to, "--to")};
  if (!concept_text.empty()) q.concept_clause = ConceptClause{concept_text, expand};
  SearchIndex index(read_index(fs::path(index_path)), resources ? &resources->gazetteer : nullptr,
                    resources ? &resources->thesaurus : nullptr, config.search);
  std::map<std::string, const IndexRecord *> by_id;
  for (const auto &r : index.records()) by_id[r.doc_id] = &r;
  std::cout << "doc_id\tscore\ttitle\n";
  for (const auto &hit : index.search(q)) {
    char score[32];
    std::snprintf(score, sizeof score, "%.4f", hit.score);
    std::cout << hit.doc_id << '\t' << score << '\t' << by_id[hit.doc_id]->title << '\n';
  }
  return 0;
}

int cmd_terms(const std::string &corpus, std::size_t top, const std::string &language_name) {
  std::vector<std::string> abstracts;
  for (const auto &path : corpus_files(corpus)) {
    try {
      abstracts.push_back(read_corpus_document(path).abstract);
    } catch (const Error &e) {
      std::cerr << path.string() << ": " << e.what() << '\n';
    }
  }
  Language language = language_name.empty() ? Language::kMixed : language_from_string(language_name);
  if (language == Language::kUnknown) throw MalformedInput("unknown language '" + language_name + "'");
  auto ranked = extract_terms_cvalue(abstracts, language);
  if (ranked.size() > top) ranked.resize(top);
  std::cout << "term\tfreq\tc_value\ttf_idf\n";
  for (const auto &t : ranked) {
    char c[32], w[32];
    std::snprintf(c, sizeof c, "%.4f", t.c_value);
    std::snprintf(w, sizeof w, "%.4f", t.tf_idf);
    std::cout << t.surface << '\t' << t.frequency << '\t' << c << '\t' << w << '\n';
  }
  return 0;
}

int cmd_eval(const std::string &system_path, const std::string &gold_path, const std::string &mode,
             const std::string &format) {
  GoldCorpus gold = GoldCorpus::load(gold_path);
  std::vector<EvalSpan> spans;
  for (const auto &doc : read_annotated(system_path)) {
    auto s = system_spans(doc);
    spans.insert(spans.end(), s.begin(), s.end());
  }
  EvalReport report = evaluate(spans, gold, mode == "overlap" ? MatchMode::kOverlap : MatchMode::kExact);
  std::cout << (format == "json" ? report.to_json() + "\n" : report.render_table());
  return 0;
}

Server *g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

int cmd_serve(int port, const std::string &data, const std::string &host, const std::string &resources_dir,
              const std::string &config_path) {
  PipelineConfig config = load_config(config_path);
  Resources resources = Resources::load(resources_dir);
  WorkspaceStore store(data, resources, config);
  Server server(store);
  int bound = server.bind(host, port);
  if (bound < 0) throw ResourceError("cannot bind " + host + ":" + std::to_string(port));
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cout << "listening on http://" << host << ":" << bound << " with data in " << data << std::endl;
  server.serve();
  g_server = nullptr;
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"geoscope: spatial, temporal and thematic annotation of scientific abstracts"};
  app.require_subcommand(1);

  std::string input, out, format, corpus, resources_dir = "resources", config, index_path, place, bbox, from, to,
                                      concept_text, system_path, gold_path, mode = "exact", report_format = "table",
                                      data, host = "127.0.0.1", language;
  bool expand = false;
  std::size_t top = 20;
  int port = 8080;

  auto *ingest = app.add_subcommand("ingest", "Normalize source records into MODS-TI");
  ingest->add_option("input", input, "File or directory of source records")->required();
  ingest->add_option("--out", out, "Output corpus directory")->required();
  ingest->add_option("--format", format, "Force the source format: mods, dc_xml or rdf");

  auto *run = app.add_subcommand("run", "Annotate and index a corpus");
  run->add_option("--corpus", corpus, "Corpus directory or file")->required();
  run->add_option("--resources", resources_dir, "Resource directory")->capture_default_str();
  run->add_option("--out", out, "Output directory")->required();
  run->add_option("--config", config, "Configuration file");

  auto *search = app.add_subcommand("search", "Query an index on place, period and concept");
  search->add_option("--index", index_path, "index.jsonl written by run")->required();
  search->add_option("--resources", resources_dir, "Resource directory for names and labels")->capture_default_str();
  search->add_option("--place", place, "Place name");
  search->add_option("--bbox", bbox, "min_lat,min_lon,max_lat,max_lon");
  search->add_option("--from", from, "Period start (YYYY[-MM[-DD]])");
  search->add_option("--to", to, "Period end (YYYY[-MM[-DD]])");
  search->add_option("--concept", concept_text, "Concept URI or label");
  search->add_flag("--expand-broader", expand, "Also match narrower concepts");
  search->add_option("--config", config, "Configuration file (search weights)");

  auto *terms = app.add_subcommand("terms", "Rank corpus terms by C-value");
  terms->add_option("--corpus", corpus, "Corpus directory or file")->required();
  terms->add_option("--top", top, "Number of terms")->capture_default_str()->check(CLI::PositiveNumber);
  terms->add_option("--language", language, "fr, en or mixed (default)");

  auto *eval = app.add_subcommand("eval", "Score annotations against a gold corpus");
  eval->add_option("--system", system_path, "MODS-TI directory, record or collection")->required();
  eval->add_option("--gold", gold_path, "Gold TSV")->required();
  eval->add_option("--mode", mode, "exact or overlap")->capture_default_str()->check(CLI::IsMember({"exact", "overlap"}));
  eval->add_option("--format", report_format, "table or json")
      ->capture_default_str()
      ->check(CLI::IsMember({"table", "json"}));

  auto *serve = app.add_subcommand("serve", "Run the REST service");
  serve->add_option("--port", port, "Port, 0 for any free port")->capture_default_str()->check(CLI::Range(0, 65535));
  serve->add_option("--data", data, "Workspace storage directory")->required();
  serve->add_option("--host", host, "Bind address")->capture_default_str();
  serve->add_option("--resources", resources_dir, "Resource directory")->capture_default_str();
  serve->add_option("--config", config, "Configuration file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) return cmd_ingest(input, out, format);
    if (*run) return cmd_run(corpus, resources_dir, out, config);
    if (*search) {
      std::string res = search->count("--resources") || fs::exists(resources_dir) ? resources_dir : "";
      return cmd_search(index_path, res, place, bbox, from, to, concept_text, expand, config);
    }
    if (*terms) return cmd_terms(corpus, top, language);
    if (*eval) return cmd_eval(system_path, gold_path, mode, report_format);
    if (*serve) return cmd_serve(port, data, host, resources_dir, config);
  } catch (const Error &e) {
    std::cerr << "geoscope: " << e.what() << '\n';
    return 1;
  } catch (const std::exception &e) {
    std::cerr << "geoscope: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
