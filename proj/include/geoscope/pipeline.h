#ifndef GEOSCOPE_PIPELINE_H_
#define GEOSCOPE_PIPELINE_H_

// The full chain: ingest, temporal, thematic and spatial annotation, then
// index generation, fanned out over a worker pool.

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "geoscope/corpus_model.h"
#include "geoscope/index.h"
#include "geoscope/ingest.h"
#include "geoscope/spatial.h"
#include "geoscope/temporal.h"
#include "geoscope/thematic.h"

namespace geoscope {

// Everything the annotators read, loaded once per run.
struct Resources {
  Gazetteer gazetteer;
  SpatialLexicon lexicon;
  TemporalRules temporal_rules;
  Thesaurus thesaurus;

  // Reads gazetteer.tsv, lexicon_fr.txt, lexicon_en.txt, temporal_rules.tsv
  // and thesaurus.skos.xml. Any failure is rethrown as ResourceError.
  static Resources load(const std::filesystem::path &dir);
};

// Annotation chains to run; the others leave their block empty.
struct Chains {
  bool spatial = true;
  bool temporal = true;
  bool thematic = true;
};

struct PipelineConfig {
  std::size_t workers = 4;
  Chains chains;
  std::size_t top_terms = 10;  // C-value terms kept per index record
  TemporalConfig temporal;
  ResolverWeights resolver;
  SearchWeights search;

  // key = value lines with '#' comments and optional [section] headers that
  // prefix the keys ("[weights]" then "place = 2" sets weights.place). Keys:
  // workers, top_terms, decade_pivot, weights.{place,period,concept,term_bonus},
  // resolver.{feature_class,context_country,population}. Throws
  // MalformedInput on unknown keys or bad values.
  static PipelineConfig parse(std::string_view text);
  static PipelineConfig load(const std::filesystem::path &path);
};

// Wall-clock seconds per stage, summed over documents.
struct StageTimes {
  double temporal = 0;
  double thematic = 0;        // label matching and C-value extraction
  double concept_lookup = 0;  // preferred, used-for and broader labels
  double spatial = 0;
  double index_generation = 0;

  StageTimes &operator+=(const StageTimes &o);
};

struct DocumentFailure {
  std::string source;  // file path or doc id
  std::string error;
};

struct RunManifest {
  std::size_t documents = 0;  // successfully processed
  StageTimes stages;
  double total_seconds = 0;  // whole run, wall clock
  std::vector<DocumentFailure> failures;

  double mean_seconds_per_document() const { return documents ? total_seconds / documents : 0.0; }
  // Five stage lines, then total and per-document mean.
  std::string render() const;
  std::string to_json() const;
};

struct PipelineResult {
  std::vector<AnnotatedDocument> documents;  // sorted by doc_id
  std::vector<IndexRecord> index;            // same order
  std::string index_jsonl;                   // the index serialized as JSON lines
  RunManifest manifest;
};

// Runs the three annotators on one record. Stage times are added to the
// counters when given.
AnnotatedDocument annotate_document(const DocumentRecord &record, const Resources &resources,
                                    const PipelineConfig &config = {}, StageTimes *times = nullptr);

// Reads a corpus file: MODS-TI files (doctype mods-ti.dtd) are read as
// records, anything else goes through the ingest crosswalk.
DocumentRecord read_corpus_document(const std::filesystem::path &path);
DocumentRecord read_corpus_document(const SourceFile &file);

// Corpus files of a directory (*.xml and *.rdf, hidden files skipped),
// sorted. A single file is returned as is.
std::vector<std::filesystem::path> corpus_files(const std::filesystem::path &corpus);

// Annotates and indexes records. Per-document failures, duplicate doc ids
// included, are recorded in the manifest and the run continues.
// Progress report: phase "annotation" counts documents through the four
// annotation stages, phase "indexing" through index generation.
using ProgressFn = std::function<void(std::string_view phase, std::size_t done, std::size_t total)>;

PipelineResult run_pipeline(std::vector<DocumentRecord> records, const Resources &resources,
                            const PipelineConfig &config = {}, const ProgressFn &progress = {});

// Reads the corpus directory then runs the chain. Unreadable files are
// per-document failures.
PipelineResult run_pipeline(const std::filesystem::path &corpus, const Resources &resources,
                            const PipelineConfig &config = {});

// Writes <out>/mods/<doc>.xml, <out>/index.jsonl, <out>/manifest.txt and
// <out>/manifest.json.
void write_pipeline_output(const PipelineResult &result, const std::filesystem::path &out);

// File name for a doc id: characters outside [A-Za-z0-9._-] become '_'.
std::string document_file_name(std::string_view doc_id);

}  // namespace geoscope

#endif  // GEOSCOPE_PIPELINE_H_
