#include "geoscope/service.h"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "httplib.h"

#include "geoscope/error.h"
#include "geoscope/text.h"

namespace geoscope {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const char *const kDimensions[] = {"spatial", "temporal", "thematic"};

std::string now_utc() {
  std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string read_file(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MalformedInput("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Write then rename, so a crash never leaves a truncated file.
void write_file(const fs::path &path, const std::string &content) {
  fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ResourceError("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw ResourceError("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

json chains_json(const Chains &c) {
  json a = json::array();
  if (c.spatial) a.push_back("spatial");
  if (c.temporal) a.push_back("temporal");
  if (c.thematic) a.push_back("thematic");
  return a;
}

Chains chains_from_json(const json &a) {
  if (!a.is_array() || a.empty()) throw MalformedInput("chains must be a non-empty array");
  Chains c{false, false, false};
  for (const auto &v : a) {
    if (!v.is_string()) throw MalformedInput("chain names must be strings");
    auto name = v.get<std::string>();
    if (name == "spatial") {
      c.spatial = true;
    } else if (name == "temporal") {
      c.temporal = true;
    } else if (name == "thematic") {
      c.thematic = true;
    } else {
      throw MalformedInput("unknown chain '" + name + "'");
    }
  }
  return c;
}

json span_json(const std::string &dimension, const Span &span, const std::string &text) {
  return {{"id", annotation_id(dimension, span)},
          {"dimension", dimension},
          {"start", span.start},
          {"end", span.end},
          {"text", text}};
}

json annotation_json(const SpatialAnnotation &a) {
  json j = span_json("spatial", a.span, a.surface_text);
  j["kind"] = to_string(a.kind);
  if (a.indicator) j["indicator"] = to_string(*a.indicator);
  if (a.feature_noun) j["feature_noun"] = *a.feature_noun;
  if (a.anchor) j["anchor"] = {{"start", a.anchor->span.start}, {"end", a.anchor->span.end}, {"text", a.anchor->surface_text}};
  if (a.resolution) {
    const auto &r = *a.resolution;
    j["resolution"] = {{"gazetteer_id", r.gazetteer_id},   {"name", r.canonical_name},
                       {"lat", r.latitude},                {"lon", r.longitude},
                       {"feature_class", to_string(r.feature_class)}, {"country_code", r.country_code},
                       {"score", r.score}};
  }
  return j;
}

json annotation_json(const TemporalAnnotation &a) {
  json j = span_json("temporal", a.span, a.surface_text);
  j["class"] = a.timex_class == TimexClass::kDate ? "date" : "period";
  j["begin"] = a.value_begin.iso();
  if (a.value_end) j["end_value"] = a.value_end->iso();
  return j;
}

json annotation_json(const ThematicAnnotation &a) {
  json j = span_json("thematic", a.span, a.surface_text);
  j["concept_uri"] = a.concept_uri;
  j["pref_label"] = a.pref_label;
  j["used_for"] = a.used_for;
  j["broader"] = json::array();
  for (const auto &b : a.broader) j["broader"].push_back({{"uri", b.uri}, {"label", b.label}});
  return j;
}

std::string random_id() {
  static std::mutex mu;
  static std::mt19937_64 rng{std::random_device{}()};
  std::lock_guard lock(mu);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(rng()));
  return std::string(buf, 12);
}

bool valid_workspace_id(const std::string &id) {
  return !id.empty() && std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
  });
}

template <typename T>
bool erase_by_id(std::vector<T> &list, const std::string &dimension, const std::string &id) {
  auto it = std::find_if(list.begin(), list.end(), [&](const T &a) { return annotation_id(dimension, a.span) == id; });
  if (it == list.end()) return false;
  list.erase(it);
  return true;
}

bool erase_annotation(AnnotatedDocument &doc, const std::string &id) {
  return erase_by_id(doc.spatial, "spatial", id) || erase_by_id(doc.temporal, "temporal", id) ||
         erase_by_id(doc.thematic, "thematic", id);
}

AnnotatedDocument bare(const DocumentRecord &record) { return AnnotatedDocument{record, {}, {}, {}}; }

}  // namespace

std::string annotation_id(std::string_view dimension, const Span &span) {
  return std::string(dimension) + "-" + std::to_string(span.start) + "-" + std::to_string(span.end);
}

std::string to_json_line(const EditEntry &e) {
  json j{{"seq", e.seq}, {"op", e.op}, {"doc_id", e.doc_id}};
  if (e.op == "delete") {
    j["ann_id"] = e.annotation_id;
    j["dimension"] = e.dimension;
  }
  return j.dump();
}

EditEntry edit_entry_from_json(std::string_view line) {
  try {
    json j = json::parse(line);
    EditEntry e;
    e.seq = j.at("seq").get<std::size_t>();
    e.op = j.at("op").get<std::string>();
    e.doc_id = j.at("doc_id").get<std::string>();
    if (e.op == "delete") {
      e.annotation_id = j.at("ann_id").get<std::string>();
      e.dimension = j.value("dimension", "");
    } else if (e.op != "reset") {
      throw MalformedInput("unknown edit op '" + e.op + "'");
    }
    return e;
  } catch (const json::exception &ex) {
    throw MalformedInput(std::string("bad edit log entry: ") + ex.what());
  }
}

std::vector<AnnotatedDocument> apply_edits(std::vector<AnnotatedDocument> docs, const std::vector<EditEntry> &edits) {
  // Deletions after the last reset of each document.
  std::map<std::string, std::vector<std::string>> deleted;
  for (const auto &e : edits) {
    if (e.op == "reset") {
      deleted.erase(e.doc_id);
    } else {
      deleted[e.doc_id].push_back(e.annotation_id);
    }
  }
  for (auto &d : docs) {
    auto it = deleted.find(d.record.doc_id);
    if (it == deleted.end()) continue;
    for (const auto &id : it->second) erase_annotation(d, id);
  }
  return docs;
}

WorkspaceStore::WorkspaceStore(fs::path data_dir, const Resources &resources, PipelineConfig config)
    : data_dir_(std::move(data_dir)), resources_(resources), config_(std::move(config)) {
  fs::create_directories(data_dir_);
  for (const auto &entry : fs::directory_iterator(data_dir_)) {
    if (entry.is_directory() && fs::exists(entry.path() / "workspace.json")) load_workspace(entry.path());
  }
}

WorkspaceStore::~WorkspaceStore() {
  for (auto &[id, w] : workspaces_) {
    if (w->runner.joinable()) w->runner.join();
  }
}

void WorkspaceStore::load_workspace(const fs::path &dir) {
  json j = json::parse(read_file(dir / "workspace.json"));
  auto w = std::make_unique<Workspace>();
  w->id = j.at("id").get<std::string>();
  w->dir = dir;
  w->state = j.value("state", "idle");
  w->chains = chains_from_json(j.value("chains", json::array({"spatial", "temporal", "thematic"})));
  w->last_run = j.value("last_run", json());
  w->started_at = j.value("started_at", "");
  w->finished_at = j.value("finished_at", "");
  const bool interrupted = w->state == "running";
  if (interrupted) w->state = "failed";
  for (const auto &d : j.at("documents")) {
    Document doc;
    doc.doc_id = d.at("doc_id").get<std::string>();
    doc.key = d.at("key").get<std::string>();
    doc.status = d.value("status", "pending");
    doc.error = d.value("error", "");
    doc.record = parse_mods_ti(read_file(dir / "documents" / (doc.key + ".xml"))).record;
    fs::path annotated = dir / "annotated" / (doc.key + ".xml");
    if (doc.status == "done" && fs::exists(annotated)) doc.annotated = parse_mods_ti(read_file(annotated));
    if (interrupted && doc.status == "running") {
      doc.status = "failed";
      doc.error = "interrupted";
      doc.annotated.reset();
    }
    w->documents.emplace(doc.key, std::move(doc));
  }
  if (fs::exists(dir / "edits.jsonl")) {
    for (const auto &line : split(read_file(dir / "edits.jsonl"), '\n')) {
      if (!trim(line).empty()) w->edits.push_back(edit_entry_from_json(line));
    }
  }
  if (interrupted) persist(*w);
  workspaces_.emplace(w->id, std::move(w));
}

void WorkspaceStore::persist(const Workspace &w) const {
  json j;
  j["id"] = w.id;
  j["state"] = w.state;
  j["chains"] = chains_json(w.chains);
  j["last_run"] = w.last_run;
  j["started_at"] = w.started_at;
  j["finished_at"] = w.finished_at;
  j["documents"] = json::array();
  for (const auto &[key, d] : w.documents) {
    json dj{{"doc_id", d.doc_id}, {"key", d.key}, {"status", d.status}};
    if (!d.error.empty()) dj["error"] = d.error;
    j["documents"].push_back(dj);
  }
  write_file(w.dir / "workspace.json", j.dump(2) + "\n");
}

std::string WorkspaceStore::create_workspace() {
  std::lock_guard lock(mu_);
  std::string id;
  do {
    id = random_id();
  } while (workspaces_.count(id) || fs::exists(data_dir_ / id));
  auto w = std::make_unique<Workspace>();
  w->id = id;
  w->dir = data_dir_ / id;
  fs::create_directories(w->dir / "documents");
  fs::create_directories(w->dir / "annotated");
  persist(*w);
  workspaces_.emplace(id, std::move(w));
  return id;
}

std::vector<std::string> WorkspaceStore::workspace_ids() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  for (const auto &[id, w] : workspaces_) out.push_back(id);
  return out;
}

WorkspaceStore::Workspace &WorkspaceStore::find(const std::string &ws) {
  auto it = valid_workspace_id(ws) ? workspaces_.find(ws) : workspaces_.end();
  if (it == workspaces_.end()) throw NotFound("unknown workspace " + ws);
  return *it->second;
}

const WorkspaceStore::Workspace &WorkspaceStore::find(const std::string &ws) const {
  return const_cast<WorkspaceStore *>(this)->find(ws);
}

const WorkspaceStore::Document &WorkspaceStore::find_document(const Workspace &w, const std::string &doc) const {
  if (auto it = w.documents.find(doc); it != w.documents.end()) return it->second;
  for (const auto &[key, d] : w.documents) {
    if (d.doc_id == doc) return d;
  }
  throw NotFound("unknown document " + doc + " in workspace " + w.id);
}

nlohmann::json WorkspaceStore::upload(const std::string &ws, const std::vector<UploadedFile> &files) {
  if (files.empty()) throw MalformedInput("no files in upload");
  // Normalization happens outside the lock; nothing is stored unless every
  // file is accepted.
  std::vector<DocumentRecord> records;
  std::set<std::string> ids;
  for (const auto &f : files) {
    SourceFile source{f.filename, f.format, f.content};
    if (trim(f.content).empty()) throw MalformedInput(f.filename + ": empty file");
    try {
      records.push_back(read_corpus_document(source));
      check_invariants(records.back());
    } catch (const Error &e) {
      throw MalformedInput(f.filename + ": " + e.what());
    }
    if (!ids.insert(records.back().doc_id).second) {
      throw MalformedInput(f.filename + ": duplicate doc_id " + records.back().doc_id + " in upload");
    }
  }

  std::lock_guard lock(mu_);
  Workspace &w = find(ws);
  json out = json::array();
  std::string log;
  for (auto &record : records) {
    Document *doc = nullptr;
    for (auto &[key, d] : w.documents) {
      if (d.doc_id == record.doc_id) doc = &d;
    }
    if (doc) {
      // Earlier deletions no longer name this document's annotations.
      EditEntry reset{w.edits.size() + 1, "reset", record.doc_id, "", ""};
      w.edits.push_back(reset);
      log += to_json_line(reset) + "\n";
      fs::remove(w.dir / "annotated" / (doc->key + ".xml"));
    } else {
      std::string key = document_file_name(record.doc_id);
      for (int n = 2; w.documents.count(key); ++n) key = document_file_name(record.doc_id) + "-" + std::to_string(n);
      Document d;
      d.doc_id = record.doc_id;
      d.key = key;
      doc = &w.documents.emplace(key, std::move(d)).first->second;
    }
    doc->status = "pending";
    doc->error.clear();
    doc->annotated.reset();
    doc->record = std::move(record);
    write_file(w.dir / "documents" / (doc->key + ".xml"), serialize_mods_ti(bare(doc->record)));
    out.push_back({{"doc_id", doc->doc_id}, {"key", doc->key}});
  }
  if (!log.empty()) {
    std::ofstream edits(w.dir / "edits.jsonl", std::ios::app | std::ios::binary);
    edits << log;
  }
  persist(w);
  return out;
}

void WorkspaceStore::start_annotation(const std::string &ws, Chains chains) {
  std::lock_guard lock(mu_);
  Workspace &w = find(ws);
  if (w.running) throw Conflict("an annotation run is already in progress in workspace " + ws);
  if (w.runner.joinable()) w.runner.join();
  std::vector<DocumentRecord> records;
  for (auto &[key, d] : w.documents) {
    d.status = "running";
    d.error.clear();
    records.push_back(d.record);
  }
  w.running = true;
  w.state = "running";
  w.chains = chains;
  w.started_at = now_utc();
  w.finished_at.clear();
  w.phase = "annotation";
  w.progress_done = 0;
  w.progress_total = records.size();
  persist(w);
  w.runner = std::thread(&WorkspaceStore::run, this, &w, std::move(records), chains);
}

void WorkspaceStore::run(Workspace *w, std::vector<DocumentRecord> records, Chains chains) {
  PipelineConfig config = config_;
  config.chains = chains;
  std::optional<PipelineResult> result;
  std::string run_error;
  try {
    result = run_pipeline(records, resources_, config, [&](std::string_view phase, std::size_t done, std::size_t total) {
      std::lock_guard lock(mu_);
      w->phase = phase;
      w->progress_done = done;
      w->progress_total = total;
    });
  } catch (const std::exception &e) {
    run_error = e.what();
  }

  std::lock_guard lock(mu_);
  std::map<std::string, const AnnotatedDocument *> by_id;
  std::map<std::string, std::string> failures;
  if (result) {
    for (const auto &d : result->documents) by_id[d.record.doc_id] = &d;
    for (const auto &f : result->manifest.failures) failures[f.source] = f.error;
  }
  std::map<std::string, const DocumentRecord *> ran;
  for (const auto &r : records) ran[r.doc_id] = &r;
  for (auto &[key, d] : w->documents) {
    // Documents re-uploaded during the run keep their pending state.
    auto r = ran.find(d.doc_id);
    if (r == ran.end() || !(*r->second == d.record)) continue;
    auto it = by_id.find(d.doc_id);
    fs::path annotated = w->dir / "annotated" / (key + ".xml");
    if (it != by_id.end()) {
      d.status = "done";
      d.annotated = *it->second;
      write_file(annotated, serialize_mods_ti(*d.annotated));
    } else {
      d.status = "failed";
      d.error = !run_error.empty() ? run_error : failures.count(d.doc_id) ? failures[d.doc_id] : "not annotated";
      d.annotated.reset();
      fs::remove(annotated);
    }
  }
  w->running = false;
  w->state = run_error.empty() ? "completed" : "failed";
  w->finished_at = now_utc();
  w->phase.clear();
  if (result) w->last_run = json::parse(result->manifest.to_json());
  persist(*w);
  w->idle.notify_all();
}

void WorkspaceStore::wait_idle(const std::string &ws) {
  std::unique_lock lock(mu_);
  Workspace &w = find(ws);
  w.idle.wait(lock, [&] { return !w.running; });
}

nlohmann::json WorkspaceStore::status(const std::string &ws) const {
  std::lock_guard lock(mu_);
  const Workspace &w = find(ws);
  json j;
  j["workspace_id"] = w.id;
  j["state"] = w.state;
  j["running"] = w.running;
  j["chains"] = chains_json(w.chains);
  j["started_at"] = w.started_at;
  j["finished_at"] = w.finished_at;
  std::map<std::string, std::size_t> counts{{"pending", 0}, {"running", 0}, {"done", 0}, {"failed", 0}};
  json docs = json::array();
  for (const auto &[key, d] : w.documents) {
    counts[d.status]++;
    json dj{{"doc_id", d.doc_id}, {"key", d.key}, {"status", d.status}};
    if (!d.error.empty()) dj["error"] = d.error;
    docs.push_back(dj);
  }
  j["documents"] = docs;
  j["counts"] = counts;
  j["counts"]["total"] = w.documents.size();

  // Per-stage progress: the four annotation stages advance together, one
  // document at a time, then index generation.
  const json stage_seconds = w.last_run.is_object() ? w.last_run["stages"] : json::object();
  const bool chain_on[] = {w.chains.temporal, w.chains.thematic, w.chains.thematic, w.chains.spatial, true};
  const char *const names[] = {"temporal", "thematic", "concept_lookup", "spatial", "index_generation"};
  json stages = json::array();
  for (int i = 0; i < 5; ++i) {
    json s{{"stage", names[i]}, {"enabled", chain_on[i]}};
    if (w.running) {
      const bool indexing = i == 4;
      std::size_t done = 0;
      if (indexing) {
        done = w.phase == "indexing" ? w.progress_done : 0;
      } else {
        done = w.phase == "annotation" ? w.progress_done : w.progress_total;
      }
      s["done"] = done;
      s["total"] = w.progress_total;
    } else {
      std::size_t total = w.last_run.is_object() ? w.last_run.value("documents", std::size_t{0}) : 0;
      s["done"] = total;
      s["total"] = total;
    }
    s["seconds"] = stage_seconds.contains(names[i]) ? stage_seconds[names[i]] : json(0.0);
    stages.push_back(s);
  }
  j["stages"] = stages;
  j["last_run"] = w.last_run;
  j["edits"] = w.edits.size();
  return j;
}

std::vector<AnnotatedDocument> WorkspaceStore::current_documents(const Workspace &w) const {
  std::vector<AnnotatedDocument> docs;
  for (const auto &[key, d] : w.documents) docs.push_back(d.annotated ? *d.annotated : bare(d.record));
  std::sort(docs.begin(), docs.end(), [](const auto &a, const auto &b) { return a.record.doc_id < b.record.doc_id; });
  return apply_edits(std::move(docs), w.edits);
}

nlohmann::json WorkspaceStore::annotations(const std::string &ws, const std::string &doc,
                                           const std::string &dimension) const {
  if (!dimension.empty() && dimension != "spatial" && dimension != "temporal" && dimension != "thematic") {
    throw MalformedInput("unknown dimension '" + dimension + "'");
  }
  std::lock_guard lock(mu_);
  const Workspace &w = find(ws);
  const Document &d = find_document(w, doc);
  std::vector<AnnotatedDocument> one{d.annotated ? *d.annotated : bare(d.record)};
  const AnnotatedDocument current = apply_edits(std::move(one), w.edits).front();
  json list = json::array();
  auto want = [&](const char *dim) { return dimension.empty() || dimension == dim; };
  if (want("spatial")) {
    for (const auto &a : current.spatial) list.push_back(annotation_json(a));
  }
  if (want("temporal")) {
    for (const auto &a : current.temporal) list.push_back(annotation_json(a));
  }
  if (want("thematic")) {
    for (const auto &a : current.thematic) list.push_back(annotation_json(a));
  }
  return {{"doc_id", d.doc_id}, {"key", d.key}, {"status", d.status}, {"annotations", list}};
}

void WorkspaceStore::delete_annotation(const std::string &ws, const std::string &doc, const std::string &ann_id) {
  std::lock_guard lock(mu_);
  Workspace &w = find(ws);
  const Document &d = find_document(w, doc);
  std::vector<AnnotatedDocument> one{d.annotated ? *d.annotated : bare(d.record)};
  AnnotatedDocument current = apply_edits(std::move(one), w.edits).front();
  if (!erase_annotation(current, ann_id)) {
    throw NotFound("unknown annotation " + ann_id + " in document " + d.doc_id);
  }
  std::string dimension = ann_id.substr(0, ann_id.find('-'));
  EditEntry e{w.edits.size() + 1, "delete", d.doc_id, ann_id, dimension};
  std::ofstream edits(w.dir / "edits.jsonl", std::ios::app | std::ios::binary);
  edits << to_json_line(e) << '\n';
  if (!edits.flush()) throw ResourceError("cannot append to the edit log of " + ws);
  w.edits.push_back(std::move(e));
}

std::string WorkspaceStore::export_bundle(const std::string &ws) const {
  std::vector<AnnotatedDocument> docs;
  {
    std::lock_guard lock(mu_);
    docs = current_documents(find(ws));
  }
  std::string xml = serialize_mods_ti_collection(docs);
  validate_mods_ti_collection(xml);
  return xml;
}

std::string WorkspaceStore::replay_bundle(const std::string &ws) const {
  std::vector<DocumentRecord> annotate;
  std::vector<AnnotatedDocument> docs;
  std::vector<EditEntry> edits;
  Chains chains;
  {
    std::lock_guard lock(mu_);
    const Workspace &w = find(ws);
    for (const auto &[key, d] : w.documents) {
      if (d.annotated) {
        annotate.push_back(d.record);
      } else {
        docs.push_back(bare(d.record));
      }
    }
    edits = w.edits;
    chains = w.chains;
  }
  PipelineConfig config = config_;
  config.chains = chains;
  PipelineResult fresh = run_pipeline(std::move(annotate), resources_, config);
  for (auto &d : fresh.documents) docs.push_back(std::move(d));
  std::sort(docs.begin(), docs.end(), [](const auto &a, const auto &b) { return a.record.doc_id < b.record.doc_id; });
  return serialize_mods_ti_collection(apply_edits(std::move(docs), edits));
}

namespace {

void send_json(httplib::Response &res, int status, const json &body) {
  res.status = status;
  res.set_content(body.dump(2) + "\n", "application/json");
}

void send_error(httplib::Response &res, int status, const std::string &message) {
  send_json(res, status, {{"error", message}});
}

// Maps library errors onto status codes.
template <typename Fn>
void guarded(httplib::Response &res, Fn fn) {
  try {
    fn();
  } catch (const NotFound &e) {
    send_error(res, 404, e.what());
  } catch (const Conflict &e) {
    send_error(res, 409, e.what());
  } catch (const MalformedInput &e) {
    send_error(res, 422, e.what());
  } catch (const std::exception &e) {
    send_error(res, 500, e.what());
  }
}

}  // namespace

Server::Server(WorkspaceStore &store) : store_(store), http_(std::make_unique<httplib::Server>()) {
  auto &svr = *http_;
  svr.set_default_headers({{"Access-Control-Allow-Origin", "*"}});

  svr.Post("/workspaces", [this](const httplib::Request &, httplib::Response &res) {
    guarded(res, [&] { send_json(res, 201, {{"workspace_id", store_.create_workspace()}}); });
  });

  svr.Get("/workspaces", [this](const httplib::Request &, httplib::Response &res) {
    guarded(res, [&] { send_json(res, 200, {{"workspaces", store_.workspace_ids()}}); });
  });

  svr.Post("/workspaces/:id/documents", [this](const httplib::Request &req, httplib::Response &res) {
    guarded(res, [&] {
      const std::string &ws = req.path_params.at("id");
      store_.status(ws);  // 404 before 422
      if (!req.is_multipart_form_data()) throw MalformedInput("expected a multipart/form-data upload");
      std::optional<SourceFormat> format;
      if (req.has_file("format")) {
        std::string name = req.get_file_value("format").content;
        format = source_format_from_string(trim(name));
        if (!format) throw MalformedInput("unknown format '" + name + "'");
      }
      std::vector<UploadedFile> files;
      for (const auto &[field, part] : req.files) {
        if (field == "format") continue;
        files.push_back({part.filename.empty() ? field : part.filename, part.content, format});
      }
      send_json(res, 201, {{"documents", store_.upload(ws, files)}});
    });
  });

  svr.Post("/workspaces/:id/annotate", [this](const httplib::Request &req, httplib::Response &res) {
    guarded(res, [&] {
      const std::string &ws = req.path_params.at("id");
      store_.status(ws);
      Chains chains;
      if (!trim(req.body).empty()) {
        json body = json::parse(req.body, nullptr, false);
        if (body.is_discarded() || !body.is_object()) throw MalformedInput("body must be a JSON object");
        if (body.contains("chains")) chains = chains_from_json(body["chains"]);
      }
      store_.start_annotation(ws, chains);
      send_json(res, 202, {{"workspace_id", ws}, {"state", "running"}, {"chains", chains_json(chains)}});
    });
  });

  svr.Get("/workspaces/:id/status", [this](const httplib::Request &req, httplib::Response &res) {
    guarded(res, [&] { send_json(res, 200, store_.status(req.path_params.at("id"))); });
  });

  svr.Get("/workspaces/:id/documents/:doc/annotations", [this](const httplib::Request &req, httplib::Response &res) {
    guarded(res, [&] {
      std::string dimension = req.has_param("dimension") ? req.get_param_value("dimension") : "";
      send_json(res, 200, store_.annotations(req.path_params.at("id"), req.path_params.at("doc"), dimension));
    });
  });

  svr.Delete("/workspaces/:id/documents/:doc/annotations/:ann",
             [this](const httplib::Request &req, httplib::Response &res) {
               guarded(res, [&] {
                 const auto &p = req.path_params;
                 store_.delete_annotation(p.at("id"), p.at("doc"), p.at("ann"));
                 send_json(res, 200, {{"deleted", p.at("ann")}});
               });
             });

  svr.Get("/workspaces/:id/export", [this](const httplib::Request &req, httplib::Response &res) {
    guarded(res, [&] {
      res.status = 200;
      res.set_content(store_.export_bundle(req.path_params.at("id")), "application/xml; charset=utf-8");
    });
  });

  svr.set_error_handler([](const httplib::Request &, httplib::Response &res) {
    if (res.body.empty()) send_error(res, res.status, res.status == 404 ? "no such route" : "request failed");
  });
}

Server::~Server() { stop(); }

bool Server::listen(const std::string &host, int port) { return http_->listen(host, port); }

int Server::bind(const std::string &host, int port) {
  if (port == 0) return http_->bind_to_any_port(host);
  return http_->bind_to_port(host, port) ? port : -1;
}

bool Server::serve() { return http_->listen_after_bind(); }

void Server::stop() {
  if (http_->is_running()) http_->stop();
}

bool Server::running() const { return http_->is_running(); }

}  // namespace geoscope
