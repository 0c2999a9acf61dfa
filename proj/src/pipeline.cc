#include "geoscope/pipeline.h"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

#include "geoscope/error.h"
#include "geoscope/ingest.h"
#include "geoscope/text.h"

namespace geoscope {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string read_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MalformedInput("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double parse_double(const std::string &key, const std::string &value) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw MalformedInput("config: '" + key + "' expects a number, got '" + value + "'");
  }
  return v;
}

long parse_int(const std::string &key, const std::string &value, long min) {
  long v = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size() || v < min) {
    throw MalformedInput("config: '" + key + "' expects an integer >= " + std::to_string(min) + ", got '" + value + "'");
  }
  return v;
}

// Words of every chunk, as the n-gram surfaces the C-value ranking uses.
std::unordered_set<std::string> document_ngrams(const std::string &abstract) {
  std::unordered_set<std::string> out;
  for (const auto &chunk : term_chunks(abstract, Language::kMixed)) {
    for (std::size_t i = 0; i < chunk.size(); ++i) {
      std::string s;
      for (std::size_t n = 1; n <= kMaxTermWords && i + n <= chunk.size(); ++n) {
        s += (n > 1 ? " " : "") + chunk[i + n - 1];
        out.insert(s);
      }
    }
  }
  return out;
}

std::string format_seconds(double s) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", s);
  return buf;
}

}  // namespace

Resources Resources::load(const std::filesystem::path &dir) {
  auto guarded = [&](const char *what, auto &&fn) {
    try {
      return fn();
    } catch (const ResourceError &) {
      throw;
    } catch (const std::exception &e) {
      throw ResourceError(std::string(what) + ": " + e.what());
    }
  };
  return Resources{
      guarded("gazetteer", [&] { return Gazetteer::load(dir / "gazetteer.tsv"); }),
      guarded("spatial lexicon", [&] { return SpatialLexicon::load(dir); }),
      guarded("temporal rules", [&] { return TemporalRules::load(dir / "temporal_rules.tsv"); }),
      guarded("thesaurus", [&] { return Thesaurus::load(dir / "thesaurus.skos.xml"); }),
  };
}

PipelineConfig PipelineConfig::parse(std::string_view text) {
  PipelineConfig c;
  std::string section;
  std::size_t line_no = 0;
  for (const auto &raw : split(text, '\n')) {
    ++line_no;
    std::string line = raw;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw MalformedInput("config line " + std::to_string(line_no) + ": bad section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) throw MalformedInput("config line " + std::to_string(line_no) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    if (!section.empty()) key = section + "." + key;

    if (key == "workers") c.workers = static_cast<std::size_t>(parse_int(key, value, 1));
    else if (key == "top_terms") c.top_terms = static_cast<std::size_t>(parse_int(key, value, 0));
    else if (key == "decade_pivot" || key == "temporal.decade_pivot") c.temporal.decade_pivot = static_cast<int>(parse_int(key, value, 0));
    else if (key == "weights.place") c.search.place = parse_double(key, value);
    else if (key == "weights.period") c.search.period = parse_double(key, value);
    else if (key == "weights.concept") c.search.thematic = parse_double(key, value);
    else if (key == "weights.term_bonus") c.search.term_bonus = parse_double(key, value);
    else if (key == "resolver.feature_class") c.resolver.feature_class = parse_double(key, value);
    else if (key == "resolver.context_country") c.resolver.context_country = parse_double(key, value);
    else if (key == "resolver.population") c.resolver.population = parse_double(key, value);
    else throw MalformedInput("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
  }
  return c;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path &path) { return parse(read_file(path)); }

StageTimes &StageTimes::operator+=(const StageTimes &o) {
  temporal += o.temporal;
  thematic += o.thematic;
  concept_lookup += o.concept_lookup;
  spatial += o.spatial;
  index_generation += o.index_generation;
  return *this;
}

std::string RunManifest::render() const {
  std::ostringstream out;
  out << "temporal annotation: " << format_seconds(stages.temporal) << " s\n"
      << "thematic annotation: " << format_seconds(stages.thematic) << " s\n"
      << "concept lookup: " << format_seconds(stages.concept_lookup) << " s\n"
      << "spatial annotation: " << format_seconds(stages.spatial) << " s\n"
      << "index generation: " << format_seconds(stages.index_generation) << " s\n"
      << "total: " << format_seconds(total_seconds) << " s for " << documents << " documents\n"
      << "mean per document: " << format_seconds(mean_seconds_per_document()) << " s\n";
  for (const auto &f : failures) out << "failed: " << f.source << ": " << f.error << '\n';
  return out.str();
}

std::string RunManifest::to_json() const {
  nlohmann::json j;
  j["stages"] = {{"temporal", stages.temporal},
                 {"thematic", stages.thematic},
                 {"concept_lookup", stages.concept_lookup},
                 {"spatial", stages.spatial},
                 {"index_generation", stages.index_generation}};
  j["documents"] = documents;
  j["total_seconds"] = total_seconds;
  j["mean_seconds_per_document"] = mean_seconds_per_document();
  j["failures"] = nlohmann::json::array();
  for (const auto &f : failures) j["failures"].push_back({{"source", f.source}, {"error", f.error}});
  return j.dump(2);
}

AnnotatedDocument annotate_document(const DocumentRecord &record, const Resources &resources,
                                    const PipelineConfig &config, StageTimes *times) {
  StageTimes local;
  std::vector<TemporalAnnotation> temporal;
  std::vector<ThematicAnnotation> thematic;
  std::vector<SpatialAnnotation> spatial;
  auto t = Clock::now();
  if (config.chains.temporal) {
    temporal = annotate_temporal(record, resources.temporal_rules, config.temporal);
    local.temporal = seconds_since(t);
  }
  if (config.chains.thematic) {
    t = Clock::now();
    auto matches = match_concepts(record, resources.thesaurus);
    local.thematic = seconds_since(t);
    t = Clock::now();
    thematic = enrich_concepts(matches, resources.thesaurus);
    local.concept_lookup = seconds_since(t);
  }
  if (config.chains.spatial) {
    t = Clock::now();
    spatial = annotate_spatial(record, resources.gazetteer, resources.lexicon, config.resolver);
    local.spatial = seconds_since(t);
  }
  if (times) *times += local;
  return AnnotatedDocument::create(record, std::move(spatial), std::move(temporal), std::move(thematic));
}

DocumentRecord read_corpus_document(const std::filesystem::path &path) {
  return read_corpus_document(SourceFile::read(path));
}

DocumentRecord read_corpus_document(const SourceFile &file) {
  auto head = std::string_view(file.bytes).substr(0, 512);
  if (head.find("<!DOCTYPE mods SYSTEM \"" + std::string(kModsTiSystemId) + "\"") != std::string_view::npos) {
    return parse_mods_ti(file.bytes).record;
  }
  return normalize(file);
}

std::vector<std::filesystem::path> corpus_files(const std::filesystem::path &corpus) {
  std::error_code ec;
  if (std::filesystem::is_regular_file(corpus, ec)) return {corpus};
  if (!std::filesystem::is_directory(corpus, ec)) throw MalformedInput("corpus not found: " + corpus.string());
  std::vector<std::filesystem::path> out;
  for (const auto &entry : std::filesystem::directory_iterator(corpus)) {
    const auto &p = entry.path();
    std::string name = p.filename().string();
    std::string ext = p.extension().string();
    if (!entry.is_regular_file() || name.empty() || name.front() == '.') continue;
    if (ext == ".xml" || ext == ".rdf") out.push_back(p);
  }
  std::sort(out.begin(), out.end());
  return out;
}

PipelineResult run_pipeline(std::vector<DocumentRecord> records, const Resources &resources,
                            const PipelineConfig &config, const ProgressFn &progress) {
  const auto start = Clock::now();
  PipelineResult result;
  RunManifest &manifest = result.manifest;

  // Duplicates are rejected before the fan-out so the outcome does not
  // depend on scheduling.
  std::vector<const DocumentRecord *> todo;
  std::unordered_set<std::string> seen;
  for (const auto &r : records) {
    if (!seen.insert(r.doc_id).second) {
      manifest.failures.push_back({r.doc_id, "duplicate doc_id"});
      continue;
    }
    todo.push_back(&r);
  }

  std::vector<std::optional<AnnotatedDocument>> annotated(todo.size());
  std::vector<std::string> errors(todo.size());
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> finished{0};
  std::mutex times_mutex;
  auto worker = [&] {
    StageTimes mine;
    for (std::size_t i = next++; i < todo.size(); i = next++) {
      try {
        annotated[i] = annotate_document(*todo[i], resources, config, &mine);
      } catch (const std::exception &e) {
        errors[i] = e.what();
      }
      std::size_t done = ++finished;
      if (progress) progress("annotation", done, todo.size());
    }
    std::lock_guard lock(times_mutex);
    manifest.stages += mine;
  };
  std::size_t n_workers = std::max<std::size_t>(1, std::min(config.workers, todo.size()));
  if (todo.empty()) n_workers = 0;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  for (auto &t : pool) t.join();

  for (std::size_t i = 0; i < todo.size(); ++i) {
    if (annotated[i]) {
      result.documents.push_back(std::move(*annotated[i]));
    } else {
      manifest.failures.push_back({todo[i]->doc_id, errors[i]});
    }
  }
  std::sort(result.documents.begin(), result.documents.end(),
            [](const auto &a, const auto &b) { return a.record.doc_id < b.record.doc_id; });

  // Terms are ranked over the whole corpus, then each record keeps the best
  // ones occurring in its own abstract.
  auto t = Clock::now();
  std::vector<std::vector<IndexTerm>> terms(result.documents.size());
  if (config.chains.thematic && config.top_terms > 0 && !result.documents.empty()) {
    std::vector<std::string> abstracts;
    for (const auto &d : result.documents) abstracts.push_back(d.record.abstract);
    std::vector<TermCandidate> ranked;
    try {
      ranked = extract_terms_cvalue(abstracts, Language::kMixed);
    } catch (const EmptyCorpus &) {
    }
    std::unordered_map<std::string, std::size_t> rank;
    for (std::size_t i = 0; i < ranked.size(); ++i) {
      if (ranked[i].c_value > 0) rank.emplace(ranked[i].surface, i);
    }
    for (std::size_t d = 0; d < result.documents.size(); ++d) {
      std::vector<std::size_t> mine;
      for (const auto &ngram : document_ngrams(result.documents[d].record.abstract)) {
        if (auto it = rank.find(ngram); it != rank.end()) mine.push_back(it->second);
      }
      std::sort(mine.begin(), mine.end());
      if (mine.size() > config.top_terms) mine.resize(config.top_terms);
      for (std::size_t i : mine) terms[d].push_back({ranked[i].surface, ranked[i].c_value});
    }
    manifest.stages.thematic += seconds_since(t);
  }

  if (!result.documents.empty()) {
    t = Clock::now();
    for (std::size_t d = 0; d < result.documents.size(); ++d) {
      result.index.push_back(make_index_record(result.documents[d], std::move(terms[d]), &resources.gazetteer));
      result.index_jsonl += to_json_line(result.index.back());
      result.index_jsonl += '\n';
      if (progress) progress("indexing", d + 1, result.documents.size());
    }
    manifest.stages.index_generation += seconds_since(t);
  }

  manifest.documents = result.documents.size();
  manifest.total_seconds = seconds_since(start);
  return result;
}

PipelineResult run_pipeline(const std::filesystem::path &corpus, const Resources &resources,
                            const PipelineConfig &config) {
  const auto start = Clock::now();
  std::vector<DocumentRecord> records;
  std::vector<DocumentFailure> unreadable;
  for (const auto &path : corpus_files(corpus)) {
    try {
      records.push_back(read_corpus_document(path));
    } catch (const std::exception &e) {
      unreadable.push_back({path.string(), e.what()});
    }
  }
  PipelineResult result = run_pipeline(std::move(records), resources, config);
  auto &failures = result.manifest.failures;
  failures.insert(failures.begin(), unreadable.begin(), unreadable.end());
  result.manifest.total_seconds = seconds_since(start);
  return result;
}

std::string document_file_name(std::string_view doc_id) {
  std::string out;
  for (char c : doc_id) {
    bool keep = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '.' || c == '_' ||
                c == '-';
    out += keep ? c : '_';
  }
  if (out.empty() || out.front() == '.') out.insert(out.begin(), '_');
  return out;
}

void write_pipeline_output(const PipelineResult &result, const std::filesystem::path &out) {
  auto write = [](const std::filesystem::path &p, const std::string &text) {
    std::ofstream f(p, std::ios::binary);
    if (!f || !(f << text)) throw ResourceError("cannot write " + p.string());
  };
  std::filesystem::create_directories(out / "mods");
  std::set<std::string> used;
  for (const auto &doc : result.documents) {
    std::string base = document_file_name(doc.record.doc_id);
    std::string name = base;
    for (int k = 2; !used.insert(name).second; ++k) name = base + "-" + std::to_string(k);
    write(out / "mods" / (name + ".xml"), serialize_mods_ti(doc));
  }
  write(out / "index.jsonl", result.index_jsonl);
  write(out / "manifest.txt", result.manifest.render());
  write(out / "manifest.json", result.manifest.to_json());
}

}  // namespace geoscope
