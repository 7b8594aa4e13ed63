#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fimikit/common.hpp"
#include "fimikit/dataset.hpp"
#include "fimikit/evidence.hpp"
#include "fimikit/plan.hpp"
#include "fimikit/stats.hpp"

struct sqlite3;

namespace fimikit {

struct QueryLimits {
  int timeout_ms = 30000;
  std::int64_t max_rows = 100000;
};

struct RunRow {
  std::int64_t run_id = 0;
  std::string dataset;
  std::string status;  // running | complete | failed
  int next_iteration = 1;
  int max_iterations = 15;
  nlohmann::json config;
  std::string config_hash;
  std::int64_t created_at = 0;
  std::optional<std::int64_t> completed_at;
  double wall_ms = 0.0;
};

struct IterationRow {
  std::int64_t run_id = 0;
  int iteration_index = 0;
  std::string mode;    // empty for iteration 1
  std::string status;  // complete | failed
  std::string technique_id;
  std::string error;
  std::optional<nlohmann::json> summary;  // iteration 1 only
  double duration_ms = 0.0;
};

// Everything one iteration produced; persisted in a single transaction so a
// crash can never leave a half-written iteration behind.
struct IterationCommit {
  IterationRow row;
  std::optional<Finding> finding;
  std::vector<AtomicClaim> claims;
  std::vector<ProviderCallRecord> calls;
};

struct TechniqueStat {
  std::int64_t times_tested = 0;
  double mean_signal = 0.0;
  double max_signal = 0.0;
};

struct ProviderCallRow {
  std::int64_t call_id = 0;
  std::int64_t run_id = 0;
  int iteration_index = 0;
  ProviderCallRecord record;
};

// Single-file embedded store for every pipeline artifact: ingested corpora,
// runs, iterations, findings, atomic evidence, verifications and provider
// accounting. One writer at a time; the sandboxed query surface runs on a
// separate read-only connection with an authorizer installed.
class Store {
 public:
  explicit Store(const std::string& path);
  ~Store();
  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  const std::string& path() const { return path_; }

  // -- ingestion ------------------------------------------------------------

  // Parses both JSONL files, normalizes text and timestamps, and replaces
  // any prior contents of this dataset atomically. Invalid rows are rejected
  // with a reason, never dropped silently. When the manifest declares
  // expected counts, any mismatch with the accepted counts aborts the whole
  // ingest (nothing is persisted).
  IngestReport ingest_dataset(const DatasetManifest& manifest, const std::string& accounts_file,
                              const std::string& messages_file);

  bool has_dataset(const std::string& name);
  std::vector<std::string> dataset_names();
  std::optional<nlohmann::json> ingest_report(const std::string& dataset);

  // Exact counts for the iteration-1 EDA artifact.
  SummaryStats dataset_summary(const std::string& dataset);

  // Ground-truth view used by the verifier. Unlabeled accounts are excluded.
  std::map<std::string, Label> labeled_accounts(const std::string& dataset);

  // -- sandboxed queries ----------------------------------------------------

  // Restricts the `accounts` and `messages` names seen by sandboxed queries
  // to one dataset. Pass an empty name to clear.
  void scope_queries_to(const std::string& dataset);

  // Executes one gated, read-only SQL statement. Throws SandboxError on gate
  // rejection and Error on timeout; marks truncation when max_rows is hit.
  Table run_readonly_query(const std::string& sql, const QueryLimits& limits);

  // -- runs and iterations --------------------------------------------------

  std::int64_t create_run(const std::string& dataset, const nlohmann::json& config,
                          const std::string& config_hash, int max_iterations);
  std::optional<RunRow> load_run(std::int64_t run_id);
  std::vector<RunRow> runs_by_ids(const std::vector<std::int64_t>& ids);
  void set_run_status(std::int64_t run_id, const std::string& status);

  // Removes any rows at or past next_iteration left behind by an interrupted
  // process, then returns the run. Called on resume.
  RunRow prepare_resume(std::int64_t run_id);

  void commit_iteration(const IterationCommit& commit);

  std::vector<IterationRow> iterations_for_run(std::int64_t run_id);
  std::optional<SummaryStats> iteration1_summary(std::int64_t run_id);
  // Prior-round summaries for the provider context: one entry per iteration
  // in [2, before_iteration), oldest first, failed rounds marked ERROR.
  std::vector<FindingSummary> history(std::int64_t run_id, int before_iteration);
  std::map<std::string, TechniqueStat> technique_stats(std::int64_t run_id);

  // -- findings and claims --------------------------------------------------

  // Validates invariants (declared metrics only, one finding per round) and
  // persists. Returns the assigned finding_id.
  std::int64_t persist_finding(Finding& finding);

  std::vector<Finding> findings_for_run(std::int64_t run_id);
  std::optional<Finding> finding_by_id(std::int64_t finding_id);
  std::vector<AtomicClaim> claims_for_run(std::int64_t run_id);
  std::optional<AtomicClaim> claim_by_id(std::int64_t evidence_id);
  std::vector<AtomicClaim> unverified_claims(std::int64_t run_id);

  // -- verifications --------------------------------------------------------

  void insert_verification(const VerificationResult& result);
  void delete_verifications(std::int64_t run_id);
  std::vector<VerificationResult> verifications_for_run(std::int64_t run_id);
  std::optional<VerificationResult> verification_for_claim(std::int64_t evidence_id);

  // -- provider accounting ---------------------------------------------------

  std::vector<ProviderCallRow> provider_calls_for_run(std::int64_t run_id);

 private:
  friend class StoreTxn;
  void init_schema();
  void ensure_read_connection();
  void apply_scope_views();
  std::int64_t insert_finding_locked(Finding& finding);
  void insert_claim_locked(AtomicClaim& claim);
  void insert_call_locked(std::int64_t run_id, int iteration, const ProviderCallRecord& rec);

  std::string path_;
  sqlite3* db_ = nullptr;       // writer
  sqlite3* read_db_ = nullptr;  // sandboxed read-only surface, opened lazily
  std::string scope_;
  std::string applied_scope_views_;
  bool read_setup_mode_ = false;
  std::int64_t read_deadline_ms_ = 0;  // steady-clock ms; 0 = none

  friend int store_authorizer_thunk(void*, int, const char*, const char*, const char*,
                                    const char*);
  friend int store_progress_thunk(void*);
};

}  // namespace fimikit
