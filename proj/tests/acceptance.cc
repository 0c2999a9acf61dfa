// Acceptance checks: one PASS or FAIL line per criterion. Exits non-zero
// when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "geoscope/corpus_model.h"
#include "geoscope/error.h"
#include "geoscope/eval.h"
#include "geoscope/index.h"
#include "geoscope/pipeline.h"
#include "geoscope/service.h"
#include "geoscope/spatial.h"
#include "geoscope/text.h"
#include "geoscope/thematic.h"
#include "support/cvalue_oracle.h"
#include "support/eval_corpora.h"
#include "support/random_docs.h"
#include "support/search_oracle.h"
#include "support/synthetic_corpus.h"

using namespace geoscope;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

const fs::path kSource = GEOSCOPE_SOURCE_DIR;
const fs::path kGold = kSource / "fixtures" / "gold";

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string fmt(const char *format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

// A failed expectation inside a criterion.
struct Failure {
  std::string what;
};

void expect(bool ok, const std::string &what) {
  if (!ok) throw Failure{what};
}

const Resources &resources() {
  static const Resources r = Resources::load(kSource / "resources");
  return r;
}

fs::path fresh_dir(const std::string &name) {
  fs::path dir = fs::temp_directory_path() / ("geoscope_acceptance_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int failures = 0;

void criterion(const std::string &name, const std::function<std::string()> &body) {
  auto t = Clock::now();
  std::string detail;
  bool pass = false;
  try {
    detail = body();
    pass = true;
  } catch (const Failure &f) {
    detail = f.what;
  } catch (const std::exception &e) {
    detail = std::string("exception: ") + e.what();
  }
  failures += !pass;
  std::cout << (pass ? "PASS" : "FAIL") << "  " << name << ": " << detail << " [" << fmt("%.2f", seconds_since(t))
            << " s]" << std::endl;
}

std::string metric_fidelity() {
  auto t = Clock::now();
  struct Cell {
    std::size_t tp, fp, fn;
    double printed;
    bool ratio;
  };
  // The four table cells, then the press-corpus figure.
  const Cell cells[] = {{9, 0, 1, 0.947, false}, {7161, 539, 2139, 0.842, false}, {9, 1, 6, 0.72, false},
                        {47, 3, 41, 0.68, false}, {8281, 5075, 819, 0.74, true}};
  std::string detail = "F =";
  for (const auto &c : cells) {
    auto [sys, gold] = testing::corpus_with(c.tp, c.fp, c.fn);
    double f = evaluate(sys, gold, MatchMode::kExact).dimension("spatial").f_measure();
    expect(std::abs(f - c.printed) <= 0.005,
           "F " + fmt("%.4f", f) + " differs from " + fmt("%.3f", c.printed) + " by more than 0.5 pp");
    detail += " " + (c.ratio ? format_ratio(f) : format_percent(f));
  }
  double elapsed = seconds_since(t);
  expect(elapsed < 1.0, "took " + fmt("%.3f", elapsed) + " s");
  return detail + ", within 0.5 pp, in " + fmt("%.3f", elapsed) + " s";
}

std::string gold_fixture() {
  auto t = Clock::now();
  GoldCorpus gold = GoldCorpus::load(kGold / "gold.tsv");
  PipelineResult result = run_pipeline(kGold / "corpus", resources());
  expect(result.manifest.failures.empty(), "pipeline failures on the gold corpus");
  expect(result.documents.size() == 20, "expected 20 documents, got " + std::to_string(result.documents.size()));
  std::set<Language> languages;
  std::vector<EvalSpan> spans;
  for (const auto &d : result.documents) {
    languages.insert(d.record.language);
    auto detailed = annotate_spatial_detailed(d.record, resources().gazetteer, resources().lexicon);
    auto s = system_spans(d, detailed.organizations);
    spans.insert(spans.end(), s.begin(), s.end());
  }
  expect(languages.count(Language::kFr) && languages.count(Language::kEn), "corpus is not bilingual");
  check_gold_bounds(gold, [&] {
    std::vector<DocumentRecord> r;
    for (const auto &d : result.documents) r.push_back(d.record);
    return r;
  }());
  EvalReport report = evaluate(spans, gold, MatchMode::kExact);
  EvalCounts spatial = report.kinds("spatial", {"ESA", "ESR"});
  double f = spatial.f_measure();
  expect(f >= 0.85, "spatial exact F " + fmt("%.3f", f) + " < 0.85");

  // Every reference example is found with its exact span and kind.
  const std::pair<const char *, const char *> examples[] = {
      {"golfe de Guinée", "ESA"}, {"au sud du Bénin", "ESR"}, {"fleuve Sénégal", "ESA"},
      {"Wujiang River Basin", "ESA"}, {"Near Paris", "ESR"}, {"lac Eyre", "ESA"}, {"Indian Ocean", "ESA"}};
  for (const auto &[surface, kind] : examples) {
    bool found = false;
    for (const auto &d : result.documents) {
      for (const auto &a : d.spatial) {
        if (a.surface_text == surface && to_string(a.kind) == kind) {
          EvalSpan s{d.record.doc_id, a.span.start, a.span.end, "spatial", kind};
          found |= std::find(gold.spans.begin(), gold.spans.end(), s) != gold.spans.end();
        }
      }
    }
    expect(found, std::string(surface) + " not found as " + kind);
  }
  double elapsed = seconds_since(t);
  expect(elapsed < 30.0, "took " + fmt("%.1f", elapsed) + " s");
  return "spatial exact F " + fmt("%.3f", f) + " (tp " + std::to_string(spatial.tp) + ", fp " +
         std::to_string(spatial.fp) + ", fn " + std::to_string(spatial.fn) + "), 7 reference examples at their kinds, " +
         fmt("%.2f", elapsed) + " s";
}

std::string disambiguation() {
  auto doc = [](std::string abstract) {
    DocumentRecord r;
    r.doc_id = "d";
    r.title = "t";
    r.abstract = std::move(abstract);
    r.language = Language::kFr;
    return r;
  };
  auto resolved = [&](const std::string &abstract, const std::string &surface) {
    for (const auto &a : annotate_spatial(doc(abstract), resources().gazetteer, resources().lexicon)) {
      if (a.surface_text == surface) {
        expect(a.resolution.has_value(), surface + " is unresolved");
        return *a.resolution;
      }
    }
    throw Failure{surface + " not annotated"};
  };
  auto river = resolved("Le débit du fleuve Sénégal a diminué.", "fleuve Sénégal");
  expect(river.feature_class == FeatureClass::kHydrographic,
         "fleuve Sénégal resolved to " + river.gazetteer_id + " (" + to_string(river.feature_class) + ")");
  auto bayonne =
      resolved("Des enquêtes menées à Toulouse, à Biarritz et à Bayonne montrent une hausse.", "Bayonne");
  expect(bayonne.country_code == "FR", "Bayonne resolved to " + bayonne.gazetteer_id + " in " + bayonne.country_code);
  return "fleuve Sénégal -> " + river.gazetteer_id + " (" + to_string(river.feature_class) + "), Bayonne -> " +
         bayonne.gazetteer_id + " (" + bayonne.country_code + ")";
}

std::string oracle_equivalence() {
  // Search against a brute-force scan.
  testing::RandomSearchCorpora corpora(2024, resources().gazetteer);
  std::size_t queries = 0, hits = 0;
  for (int corpus = 0; corpus < 200; ++corpus) {
    auto records = corpora.records();
    auto weights = corpora.weights();
    SearchIndex index(records, &resources().gazetteer, nullptr, weights);
    for (int q = 0; q < 25; ++q) {
      auto cmp = testing::compare_search(index, records, corpora.query(), weights, resources().gazetteer);
      expect(cmp.agree(), "search differs from the brute-force scan on corpus " + std::to_string(corpus));
      ++queries;
      hits += cmp.got.size();
    }
  }

  // C-value against the hand formula.
  std::mt19937 rng(17);
  std::size_t corpora_checked = 0;
  for (int iter = 0; iter < 300; ++iter) {
    auto corpus = testing::small_term_corpus(rng);
    std::size_t tokens = 0;
    for (const auto &a : corpus) tokens += split(collapse_whitespace(a), ' ').size();
    expect(tokens <= 50, "generated corpus exceeds 50 tokens");
    bool empty = std::all_of(corpus.begin(), corpus.end(), [](auto &a) { return term_chunks(a, Language::kEn).empty(); });
    if (empty) continue;
    auto expected = testing::brute_cvalue(corpus);
    auto terms = extract_terms_cvalue(corpus, Language::kEn);
    expect(terms.size() == expected.size(), "C-value candidate sets differ");
    for (const auto &t : terms) {
      expect(expected.count(t.surface) && std::abs(t.c_value - expected[t.surface]) < 1e-9,
             "C-value of '" + t.surface + "' differs from the formula");
    }
    ++corpora_checked;
  }

  // Determinism: same bytes across runs and worker counts.
  std::string reference;
  for (std::size_t workers : {1, 8, 3}) {
    PipelineConfig config;
    config.workers = workers;
    PipelineResult r = run_pipeline(kGold / "corpus", resources(), config);
    std::string out = serialize_mods_ti_collection(r.documents) + r.index_jsonl;
    if (reference.empty()) reference = out;
    expect(out == reference, "annotation output changed with " + std::to_string(workers) + " workers");
  }
  return std::to_string(queries) + " queries on 200 random corpora equal the scan (" + std::to_string(hits) +
         " hits), C-value equals the formula on " + std::to_string(corpora_checked) +
         " corpora of at most 50 tokens, annotation identical across 3 runs";
}

std::string round_trips() {
  testing::RandomDocs gen(20240611);
  for (int i = 0; i < 300; ++i) {
    AnnotatedDocument doc = gen.document();
    std::string xml = serialize_mods_ti(doc);
    validate_mods_ti(xml);
    expect(parse_mods_ti(xml) == doc, "MODS-TI round trip changed document " + doc.record.doc_id);
  }

  testing::RandomSearchCorpora corpora(99, resources().gazetteer);
  std::size_t records_checked = 0;
  for (int i = 0; i < 100; ++i) {
    auto records = corpora.records();
    for (auto &r : records) r.terms.push_back({"term " + r.doc_id, corpora.gen().real(0, 10)});
    std::stringstream ss;
    write_index(ss, records);
    expect(read_index(ss) == records, "JSONL round trip changed a corpus");
    records_checked += records.size();
  }
  // Annotated records from real runs too.
  PipelineResult gold = run_pipeline(kGold / "corpus", resources());
  std::stringstream jsonl(gold.index_jsonl);
  expect(read_index(jsonl) == gold.index, "JSONL round trip changed the gold index");

  // Service exports stay valid through uploads, runs and deletions.
  fs::path data = fresh_dir("service");
  std::size_t exports = 0, deletions = 0;
  {
    WorkspaceStore store(data, resources());
    std::string ws = store.create_workspace();
    std::vector<UploadedFile> files;
    for (const auto &f : corpus_files(kGold / "corpus")) {
      std::ifstream in(f, std::ios::binary);
      std::stringstream content;
      content << in.rdbuf();
      files.push_back({f.filename().string(), content.str(), std::nullopt});
    }
    std::set<std::string> ids;
    for (int i = 0; i < 30; ++i) {
      AnnotatedDocument d = gen.document();
      if (!ids.insert(d.record.doc_id).second) continue;
      d.spatial.clear();
      d.temporal.clear();
      d.thematic.clear();
      files.push_back({"random" + std::to_string(i) + ".xml", serialize_mods_ti(d), std::nullopt});
    }
    store.upload(ws, files);
    validate_mods_ti_collection(store.export_bundle(ws));
    ++exports;
    store.start_annotation(ws, Chains{});
    store.wait_idle(ws);
    std::mt19937 pick(5);
    auto status = store.status(ws);
    for (int round = 0; round < 40; ++round) {
      const auto &docs = status["documents"];
      std::string key = docs[pick() % docs.size()]["key"];
      auto anns = store.annotations(ws, key)["annotations"];
      if (anns.empty()) continue;
      store.delete_annotation(ws, key, anns[pick() % anns.size()]["id"]);
      ++deletions;
      validate_mods_ti_collection(store.export_bundle(ws));
      ++exports;
    }
    std::string exported = store.export_bundle(ws);
    expect(store.replay_bundle(ws) == exported, "replaying the edit log does not reproduce the export");
    WorkspaceStore reloaded(data, resources());
    expect(reloaded.export_bundle(ws) == exported, "export changed after reloading from disk");
  }
  fs::remove_all(data);
  return "300 random MODS-TI documents, " + std::to_string(records_checked) +
         " random index records and the gold index round-trip; " + std::to_string(exports) +
         " service exports DTD-valid across " + std::to_string(deletions) + " deletions, replay reproduces the export";
}

std::string throughput() {
  fs::path corpus = fresh_dir("synthetic");
  testing::SyntheticCorpus::write(testing::SyntheticCorpus(7).documents(100), corpus);
  PipelineResult result = run_pipeline(corpus, resources());
  const RunManifest &m = result.manifest;
  expect(m.failures.empty(), "failures in the synthetic run");
  expect(m.documents == 100, "processed " + std::to_string(m.documents) + " documents");
  std::size_t annotations = 0;
  for (const auto &d : result.documents) annotations += d.spatial.size() + d.temporal.size() + d.thematic.size();
  expect(annotations > 100 * 10, "synthetic corpus yields too few annotations");
  std::string manifest = m.render();
  for (const char *line : {"temporal annotation:", "thematic annotation:", "concept lookup:", "spatial annotation:",
                           "index generation:", "total:", "mean per document:"}) {
    expect(manifest.find(line) != std::string::npos, std::string("manifest lacks '") + line + "'");
  }
  double mean = m.mean_seconds_per_document();
  expect(mean <= 2.0, "mean " + fmt("%.3f", mean) + " s/doc exceeds 2.0");
  fs::remove_all(corpus);
  return fmt("%.4f", mean) + " s/doc over 100 documents (" + std::to_string(annotations) +
         " annotations), manifest lists 5 stages, total and mean";
}

}  // namespace

int main() {
  criterion("metric fidelity", metric_fidelity);
  criterion("gold fixture", gold_fixture);
  criterion("disambiguation", disambiguation);
  criterion("oracle equivalence", oracle_equivalence);
  criterion("round-trips", round_trips);
  criterion("throughput", throughput);
  std::cout << (failures ? std::to_string(failures) + " criterion(s) failed" : "all criteria passed") << std::endl;
  return failures ? 1 : 0;
}
