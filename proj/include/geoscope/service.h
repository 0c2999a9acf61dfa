#ifndef GEOSCOPE_SERVICE_H_
#define GEOSCOPE_SERVICE_H_

// Annotation workspaces behind a REST API. WorkspaceStore holds the state and
// its disk layout; Server maps HTTP routes onto it.

#include <condition_variable>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "geoscope/corpus_model.h"
#include "geoscope/ingest.h"
#include "geoscope/pipeline.h"

namespace httplib {
class Server;
}

namespace geoscope {

struct UploadedFile {
  std::string filename;
  std::string content;
  std::optional<SourceFormat> format;  // detected when absent
};

// One entry of a workspace edit log. A reset, logged when a document is re-uploaded, cancels the earlier
// deletions of that document.
struct EditEntry {
  std::size_t seq = 0;
  std::string op = "delete";  // delete or reset
  std::string doc_id;
  std::string annotation_id;
  std::string dimension;

  bool operator==(const EditEntry &) const = default;
};

std::string to_json_line(const EditEntry &entry);
// Throws MalformedInput.
EditEntry edit_entry_from_json(std::string_view line);

// "<dimension>-<start>-<end>", stable across deterministic runs.
std::string annotation_id(std::string_view dimension, const Span &span);

// Removes the annotations named by the edits. Entries naming unknown
// documents or annotations are ignored.
std::vector<AnnotatedDocument> apply_edits(std::vector<AnnotatedDocument> docs, const std::vector<EditEntry> &edits);

// Workspaces live in <data>/<id>/:
//   workspace.json   documents, per-document status, last run
//   documents/<key>.xml   uploaded records as MODS-TI without annotations
//   annotated/<key>.xml   output of the last completed run
//   edits.jsonl      edit log, one JSON object per line
// Existing workspaces are reloaded on construction. Methods throw NotFound
// for unknown ids, MalformedInput for bad input and Conflict when a run is
// already in progress. All methods are thread-safe.
class WorkspaceStore {
 public:
  WorkspaceStore(std::filesystem::path data_dir, const Resources &resources, PipelineConfig config = {});
  ~WorkspaceStore();
  WorkspaceStore(const WorkspaceStore &) = delete;
  WorkspaceStore &operator=(const WorkspaceStore &) = delete;

  std::string create_workspace();
  std::vector<std::string> workspace_ids() const;

  // Normalizes every file first; one bad file rejects the whole upload.
  // Returns [{doc_id, key}] in upload order. A re-uploaded doc id replaces
  // the stored record and goes back to pending.
  nlohmann::json upload(const std::string &ws, const std::vector<UploadedFile> &files);

  // Starts an asynchronous run over every document of the workspace.
  void start_annotation(const std::string &ws, Chains chains);
  // Blocks until no run is in progress.
  void wait_idle(const std::string &ws);

  nlohmann::json status(const std::string &ws) const;

  // Annotations of the last completed run with the edit log applied.
  // dimension is spatial, temporal or thematic; empty means all.
  nlohmann::json annotations(const std::string &ws, const std::string &doc, const std::string &dimension = {}) const;

  // Appends to the edit log. NotFound for an unknown or already deleted id.
  void delete_annotation(const std::string &ws, const std::string &doc, const std::string &ann_id);

  // MODS-TI collection of the current state, sorted by doc_id.
  std::string export_bundle(const std::string &ws) const;

  // Fresh run over the stored records with the last run's chains, then the
  // edit log. Reproduces export_bundle.
  std::string replay_bundle(const std::string &ws) const;

 private:
  struct Document {
    std::string doc_id;
    std::string key;  // file name stem
    std::string status = "pending";
    std::string error;
    DocumentRecord record;
    std::optional<AnnotatedDocument> annotated;
  };
  struct Workspace {
    std::string id;
    std::filesystem::path dir;
    std::map<std::string, Document> documents;  // by key
    std::vector<EditEntry> edits;
    bool running = false;
    std::string state = "idle";  // idle, running, completed, failed
    Chains chains;
    nlohmann::json last_run;  // manifest of the last completed run, null before
    std::string started_at;
    std::string finished_at;
    std::string phase;  // annotation or indexing while running
    std::size_t progress_done = 0;
    std::size_t progress_total = 0;
    std::thread runner;
    std::condition_variable idle;
  };

  Workspace &find(const std::string &ws);
  const Workspace &find(const std::string &ws) const;
  const Document &find_document(const Workspace &w, const std::string &doc) const;
  std::vector<AnnotatedDocument> current_documents(const Workspace &w) const;
  void persist(const Workspace &w) const;
  void load_workspace(const std::filesystem::path &dir);
  void run(Workspace *w, std::vector<DocumentRecord> records, Chains chains);

  std::filesystem::path data_dir_;
  const Resources &resources_;
  PipelineConfig config_;
  mutable std::mutex mu_;
  std::map<std::string, std::unique_ptr<Workspace>> workspaces_;
};

// The HTTP front end, documented in docs/api.md.
class Server {
 public:
  explicit Server(WorkspaceStore &store);
  ~Server();

  // Binds then serves until stop(); port 0 picks a free port.
  bool listen(const std::string &host, int port);
  // Binds without serving; returns the port or -1.
  int bind(const std::string &host, int port = 0);
  // Serves on the bound socket until stop().
  bool serve();
  void stop();
  bool running() const;

 private:
  WorkspaceStore &store_;
  std::unique_ptr<httplib::Server> http_;
};

}  // namespace geoscope

#endif  // GEOSCOPE_SERVICE_H_
