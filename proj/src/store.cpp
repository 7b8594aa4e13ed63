#include "fimikit/store.hpp"

#include <sqlite3.h>

#include <cctype>
#include <chrono>
#include <fstream>
#include <sstream>

#include "fimikit/common.hpp"
#include "fimikit/sandbox.hpp"

namespace fimikit {

using nlohmann::json;

namespace {

std::int64_t steady_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

// Thin RAII wrapper over sqlite3_stmt.
class Stmt {
 public:
  Stmt(sqlite3* db, const std::string& sql) : db_(db) {
    if (sqlite3_prepare_v2(db, sql.c_str(), -1, &stmt_, nullptr) != SQLITE_OK) {
      throw StoreError("prepare failed: " + std::string(sqlite3_errmsg(db)) + " in: " + sql);
    }
  }
  ~Stmt() { sqlite3_finalize(stmt_); }
  Stmt(const Stmt&) = delete;
  Stmt& operator=(const Stmt&) = delete;

  Stmt& bind(int idx, std::int64_t v) {
    check(sqlite3_bind_int64(stmt_, idx, v));
    return *this;
  }
  Stmt& bind(int idx, int v) { return bind(idx, static_cast<std::int64_t>(v)); }
  Stmt& bind(int idx, double v) {
    check(sqlite3_bind_double(stmt_, idx, v));
    return *this;
  }
  Stmt& bind(int idx, const std::string& v) {
    check(sqlite3_bind_text(stmt_, idx, v.c_str(), static_cast<int>(v.size()), SQLITE_TRANSIENT));
    return *this;
  }
  Stmt& bind_null(int idx) {
    check(sqlite3_bind_null(stmt_, idx));
    return *this;
  }
  Stmt& bind_opt(int idx, const std::optional<std::int64_t>& v) {
    return v ? bind(idx, *v) : bind_null(idx);
  }
  Stmt& bind_opt(int idx, const std::optional<double>& v) {
    return v ? bind(idx, *v) : bind_null(idx);
  }
  Stmt& bind_opt(int idx, const std::optional<std::string>& v) {
    return v ? bind(idx, *v) : bind_null(idx);
  }

  // True while a row is available.
  bool step() {
    const int rc = sqlite3_step(stmt_);
    if (rc == SQLITE_ROW) return true;
    if (rc == SQLITE_DONE) return false;
    throw StoreError("step failed: " + std::string(sqlite3_errmsg(db_)));
  }
  void exec() { step(); }

  bool is_null(int col) { return sqlite3_column_type(stmt_, col) == SQLITE_NULL; }
  std::int64_t col_int(int col) { return sqlite3_column_int64(stmt_, col); }
  double col_double(int col) { return sqlite3_column_double(stmt_, col); }
  std::string col_text(int col) {
    const unsigned char* p = sqlite3_column_text(stmt_, col);
    return p ? reinterpret_cast<const char*>(p) : "";
  }
  std::optional<std::int64_t> col_opt_int(int col) {
    if (is_null(col)) return std::nullopt;
    return col_int(col);
  }
  std::optional<double> col_opt_double(int col) {
    if (is_null(col)) return std::nullopt;
    return col_double(col);
  }
  std::optional<std::string> col_opt_text(int col) {
    if (is_null(col)) return std::nullopt;
    return col_text(col);
  }
  sqlite3_stmt* raw() { return stmt_; }

 private:
  void check(int rc) {
    if (rc != SQLITE_OK) throw StoreError("bind failed: " + std::string(sqlite3_errmsg(db_)));
  }
  sqlite3* db_;
  sqlite3_stmt* stmt_ = nullptr;
};

void exec_sql(sqlite3* db, const char* sql) {
  char* err = nullptr;
  if (sqlite3_exec(db, sql, nullptr, nullptr, &err) != SQLITE_OK) {
    std::string msg = err ? err : "unknown error";
    sqlite3_free(err);
    throw StoreError("exec failed: " + msg);
  }
}

std::string quote_sql_literal(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += "''";
    out += c;
  }
  out += "'";
  return out;
}

constexpr const char* kSchema = R"sql(
CREATE TABLE IF NOT EXISTS datasets(
  name TEXT PRIMARY KEY,
  platform TEXT NOT NULL,
  time_start INTEGER NOT NULL,
  time_end INTEGER NOT NULL,
  label_semantics TEXT NOT NULL DEFAULT '',
  manifest_json TEXT NOT NULL,
  ingest_report_json TEXT NOT NULL,
  ingested_at INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS accounts(
  dataset TEXT NOT NULL,
  account_id TEXT NOT NULL,
  platform TEXT NOT NULL,
  created_at TEXT,
  created_at_s INTEGER,
  display_name TEXT,
  profile_description TEXT,
  label TEXT NOT NULL CHECK(label IN ('positive','negative','unlabeled')),
  PRIMARY KEY(dataset, account_id)
);
CREATE INDEX IF NOT EXISTS idx_accounts_label ON accounts(dataset, label);
CREATE TABLE IF NOT EXISTS messages(
  dataset TEXT NOT NULL,
  message_id TEXT NOT NULL,
  account_id TEXT NOT NULL,
  timestamp TEXT NOT NULL,
  timestamp_s INTEGER NOT NULL,
  text TEXT NOT NULL DEFAULT '',
  message_type TEXT NOT NULL CHECK(message_type IN ('post','repost','reply','comment')),
  parent_id TEXT,
  channel_id TEXT,
  language TEXT,
  reaction_count INTEGER,
  link_count INTEGER NOT NULL DEFAULT 0,
  hashtags TEXT NOT NULL DEFAULT '[]',
  mentions TEXT NOT NULL DEFAULT '[]',
  PRIMARY KEY(dataset, message_id)
);
CREATE INDEX IF NOT EXISTS idx_messages_account ON messages(dataset, account_id);
CREATE INDEX IF NOT EXISTS idx_messages_time ON messages(dataset, timestamp_s);
CREATE TABLE IF NOT EXISTS runs(
  run_id INTEGER PRIMARY KEY,
  dataset TEXT NOT NULL,
  status TEXT NOT NULL CHECK(status IN ('running','complete','failed')),
  next_iteration INTEGER NOT NULL,
  max_iterations INTEGER NOT NULL,
  config_json TEXT NOT NULL,
  config_hash TEXT NOT NULL,
  created_at INTEGER NOT NULL,
  completed_at INTEGER,
  wall_ms REAL NOT NULL DEFAULT 0
);
CREATE TABLE IF NOT EXISTS iterations(
  run_id INTEGER NOT NULL,
  iteration_index INTEGER NOT NULL,
  mode TEXT,
  status TEXT NOT NULL CHECK(status IN ('complete','failed')),
  technique_id TEXT,
  error TEXT,
  summary_json TEXT,
  duration_ms REAL NOT NULL DEFAULT 0,
  PRIMARY KEY(run_id, iteration_index)
);
CREATE TABLE IF NOT EXISTS findings(
  finding_id INTEGER PRIMARY KEY,
  run_id INTEGER NOT NULL,
  iteration_index INTEGER NOT NULL,
  technique_id TEXT NOT NULL,
  evidence_type TEXT NOT NULL,
  hypothesis TEXT NOT NULL,
  metrics_json TEXT NOT NULL,
  signal_strength REAL NOT NULL,
  status TEXT NOT NULL CHECK(status IN ('PASS','INCONCLUSIVE','FAIL')),
  query_log_json TEXT NOT NULL,
  plan_json TEXT NOT NULL,
  UNIQUE(run_id, iteration_index)
);
CREATE TABLE IF NOT EXISTS atomic_evidence(
  evidence_id INTEGER PRIMARY KEY,
  finding_id INTEGER NOT NULL,
  run_id INTEGER NOT NULL,
  iteration_index INTEGER NOT NULL,
  ordinal INTEGER NOT NULL,
  technique_id TEXT NOT NULL,
  claim_text TEXT NOT NULL,
  evidence_type TEXT NOT NULL,
  strength TEXT NOT NULL,
  condition_json TEXT NOT NULL,
  explicit_threshold INTEGER NOT NULL,
  UNIQUE(finding_id, ordinal)
);
CREATE TABLE IF NOT EXISTS verifications(
  evidence_id INTEGER PRIMARY KEY,
  run_id INTEGER NOT NULL,
  tp INTEGER, fp INTEGER, fn INTEGER, tn INTEGER,
  odds_ratio REAL,
  or_corrected INTEGER NOT NULL DEFAULT 0,
  p_value REAL,
  crit_explicit INTEGER NOT NULL,
  crit_effect INTEGER NOT NULL,
  crit_significance INTEGER NOT NULL,
  status TEXT NOT NULL CHECK(status IN ('PASS','FAIL')),
  error TEXT,
  verified_at INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS provider_calls(
  call_id INTEGER PRIMARY KEY,
  run_id INTEGER NOT NULL,
  iteration_index INTEGER NOT NULL,
  provider TEXT NOT NULL,
  phase TEXT NOT NULL,
  status TEXT NOT NULL,
  latency_ms REAL NOT NULL,
  prompt_tokens INTEGER,
  completion_tokens INTEGER,
  request_json TEXT NOT NULL DEFAULT '',
  response_json TEXT NOT NULL DEFAULT '',
  created_at INTEGER NOT NULL
);
)sql";

// Scoped write transaction; rolls back unless commit() ran.
class Txn {
 public:
  explicit Txn(sqlite3* db) : db_(db) { exec_sql(db_, "BEGIN IMMEDIATE"); }
  ~Txn() {
    if (!done_) sqlite3_exec(db_, "ROLLBACK", nullptr, nullptr, nullptr);
  }
  void commit() {
    exec_sql(db_, "COMMIT");
    done_ = true;
  }

 private:
  sqlite3* db_;
  bool done_ = false;
};

}  // namespace

// Authorizer for the sandboxed read connection: reads only, no schema or
// data changes, no dangerous functions. Scope-view setup temporarily lifts
// the restriction (our own statements, not provider SQL).
int store_authorizer_thunk(void* self, int action, const char* a1, const char* a2,
                           const char* a3, const char* a4) {
  (void)a1;
  (void)a3;
  (void)a4;
  auto* store = static_cast<Store*>(self);
  if (store->read_setup_mode_) return SQLITE_OK;
  switch (action) {
    case SQLITE_SELECT:
    case SQLITE_READ:
    case SQLITE_RECURSIVE:
      return SQLITE_OK;
    case SQLITE_FUNCTION: {
      std::string fn = a2 ? a2 : "";  // arg2 carries the function name
      for (auto& c : fn) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      if (fn == "load_extension" || fn == "readfile" || fn == "writefile" ||
          fn == "fts3_tokenizer" || fn == "edit") {
        return SQLITE_DENY;
      }
      return SQLITE_OK;
    }
    default:
      return SQLITE_DENY;
  }
}

int store_progress_thunk(void* self) {
  auto* store = static_cast<Store*>(self);
  if (store->read_deadline_ms_ != 0 && steady_ms() > store->read_deadline_ms_) return 1;
  return 0;
}

Store::Store(const std::string& path) : path_(path) {
  if (sqlite3_open_v2(path.c_str(), &db_, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE, nullptr) !=
      SQLITE_OK) {
    const std::string msg = db_ ? sqlite3_errmsg(db_) : "out of memory";
    throw StoreError("cannot open store " + path + ": " + msg);
  }
  sqlite3_busy_timeout(db_, 10000);
  exec_sql(db_, "PRAGMA foreign_keys=ON");
  init_schema();
}

Store::~Store() {
  if (read_db_) sqlite3_close(read_db_);
  if (db_) sqlite3_close(db_);
}

void Store::init_schema() { exec_sql(db_, kSchema); }

// ---------------------------------------------------------------------------
// ingestion
// ---------------------------------------------------------------------------

namespace {

// Field access honoring the manifest's column mapping: the mapped source key
// wins, the unified name is the fallback.
const json* get_field(const json& rec, const std::string& unified,
                      const std::map<std::string, std::string>& column_map) {
  auto mapped = column_map.find(unified);
  if (mapped != column_map.end()) {
    auto it = rec.find(mapped->second);
    if (it != rec.end() && !it->is_null()) return &*it;
  }
  auto it = rec.find(unified);
  if (it != rec.end() && !it->is_null()) return &*it;
  return nullptr;
}

std::optional<std::string> field_string(const json& rec, const std::string& unified,
                                        const std::map<std::string, std::string>& map) {
  const json* v = get_field(rec, unified, map);
  if (!v) return std::nullopt;
  if (v->is_string()) return v->get<std::string>();
  if (v->is_number_integer()) return std::to_string(v->get<std::int64_t>());
  return std::nullopt;
}

std::optional<std::int64_t> field_timestamp(const json& rec, const std::string& unified,
                                            const std::map<std::string, std::string>& map,
                                            bool* present) {
  const json* v = get_field(rec, unified, map);
  if (present) *present = v != nullptr;
  if (!v) return std::nullopt;
  if (v->is_number_integer()) return v->get<std::int64_t>();
  if (v->is_string()) return parse_timestamp(v->get<std::string>());
  return std::nullopt;
}

}  // namespace

IngestReport Store::ingest_dataset(const DatasetManifest& manifest,
                                   const std::string& accounts_file,
                                   const std::string& messages_file) {
  std::ifstream accounts_in(accounts_file);
  if (!accounts_in) throw UserError("cannot open accounts file: " + accounts_file);
  std::ifstream messages_in(messages_file);
  if (!messages_in) throw UserError("cannot open messages file: " + messages_file);

  IngestReport report;
  report.dataset = manifest.dataset_name;
  const std::int64_t now = now_epoch_seconds();

  Txn txn(db_);

  // Atomic replace of any prior version of this dataset.
  for (const char* sql : {"DELETE FROM accounts WHERE dataset=?1",
                          "DELETE FROM messages WHERE dataset=?1",
                          "DELETE FROM datasets WHERE name=?1"}) {
    Stmt del(db_, sql);
    del.bind(1, manifest.dataset_name);
    del.exec();
  }

  Stmt ins_account(db_,
                   "INSERT INTO accounts(dataset, account_id, platform, created_at, created_at_s, "
                   "display_name, profile_description, label) VALUES(?1,?2,?3,?4,?5,?6,?7,?8)");
  Stmt ins_message(
      db_,
      "INSERT INTO messages(dataset, message_id, account_id, timestamp, timestamp_s, text, "
      "message_type, parent_id, channel_id, language, reaction_count, link_count, hashtags, "
      "mentions) VALUES(?1,?2,?3,?4,?5,?6,?7,?8,?9,?10,?11,?12,?13,?14)");

  std::set<std::string> account_ids;
  std::string line;
  std::int64_t line_no = 0;

  auto reject = [](std::vector<RejectedRow>& list, std::int64_t line, const std::string& id,
                   const std::string& reason) {
    // keep the report bounded; totals stay exact either way
    if (list.size() < 1000) list.push_back({line, id, reason});
  };

  while (std::getline(accounts_in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    ++report.accounts_input;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      reject(report.rejected_accounts, line_no, "", std::string("invalid JSON: ") + e.what());
      continue;
    }
    const auto& cmap = manifest.account_column_map;
    const auto id = field_string(rec, "account_id", cmap);
    if (!id || id->empty()) {
      reject(report.rejected_accounts, line_no, "", "missing account_id");
      continue;
    }
    if (!account_ids.insert(*id).second) {
      reject(report.rejected_accounts, line_no, *id, "duplicate account_id");
      continue;
    }
    Label label = Label::unlabeled;
    if (const json* lv = get_field(rec, "label", cmap)) {
      auto parsed = lv->is_string() ? parse_label(lv->get<std::string>()) : std::nullopt;
      if (!parsed) {
        account_ids.erase(*id);
        reject(report.rejected_accounts, line_no, *id, "invalid label");
        continue;
      }
      label = *parsed;
    }
    bool created_present = false;
    auto created = field_timestamp(rec, "created_at", cmap, &created_present);
    if (created_present && !created) {
      // unparseable creation time: keep the account, drop the field
      ++report.created_at_unparseable;
    }
    if (created && (*created < 0 || *created > now)) {
      account_ids.erase(*id);
      reject(report.rejected_accounts, line_no, *id,
             "created_at outside [1970-01-01, ingestion time]");
      continue;
    }

    ins_account.bind(1, manifest.dataset_name)
        .bind(2, *id)
        .bind(3, std::string(platform_name(manifest.platform)));
    if (created) {
      ins_account.bind(4, format_timestamp(*created)).bind(5, *created);
    } else {
      ins_account.bind_null(4).bind_null(5);
    }
    ins_account.bind_opt(6, field_string(rec, "display_name", cmap))
        .bind_opt(7, field_string(rec, "profile_description", cmap))
        .bind(8, std::string(label_name(label)));
    ins_account.exec();
    sqlite3_reset(ins_account.raw());
    sqlite3_clear_bindings(ins_account.raw());

    ++report.accounts_accepted;
    if (label == Label::positive) ++report.labeled_positive;
    if (label == Label::negative) ++report.labeled_negative;
    if (label == Label::unlabeled) ++report.unlabeled;
  }

  std::set<std::string> message_ids;
  line_no = 0;
  while (std::getline(messages_in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    ++report.messages_input;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      reject(report.rejected_messages, line_no, "", std::string("invalid JSON: ") + e.what());
      continue;
    }
    const auto& cmap = manifest.message_column_map;
    const auto id = field_string(rec, "message_id", cmap);
    if (!id || id->empty()) {
      reject(report.rejected_messages, line_no, "", "missing message_id");
      continue;
    }
    if (!message_ids.insert(*id).second) {
      reject(report.rejected_messages, line_no, *id, "duplicate message_id");
      continue;
    }
    const auto account = field_string(rec, "account_id", cmap);
    if (!account || !account_ids.count(*account)) {
      reject(report.rejected_messages, line_no, *id, "unknown account");
      continue;
    }
    auto ts = field_timestamp(rec, "timestamp", cmap, nullptr);
    if (!ts) {
      reject(report.rejected_messages, line_no, *id, "missing or unparseable timestamp");
      continue;
    }
    if (*ts < manifest.time_start || *ts > manifest.time_end) {
      reject(report.rejected_messages, line_no, *id, "timestamp outside declared range");
      continue;
    }
    MessageType type = MessageType::post;
    if (const json* tv = get_field(rec, "message_type", cmap)) {
      auto parsed = tv->is_string() ? parse_message_type(tv->get<std::string>()) : std::nullopt;
      if (!parsed) {
        reject(report.rejected_messages, line_no, *id, "invalid message_type");
        continue;
      }
      type = *parsed;
    }
    std::optional<std::int64_t> reactions;
    if (const json* rv = get_field(rec, "reaction_count", cmap)) {
      if (!rv->is_number_integer() || rv->get<std::int64_t>() < 0) {
        reject(report.rejected_messages, line_no, *id, "reaction_count must be a non-negative integer");
        continue;
      }
      reactions = rv->get<std::int64_t>();
    }

    std::string raw_text;
    if (const json* tv = get_field(rec, "text", cmap); tv && tv->is_string()) {
      raw_text = tv->get<std::string>();
    }
    NormalizedText norm = normalize_message_text(raw_text);
    std::int64_t link_count = norm.urls;
    if (const json* lv = get_field(rec, "links", cmap); lv && lv->is_array()) {
      link_count += static_cast<std::int64_t>(lv->size());
    }
    auto merge_tags = [&rec, &cmap](const char* key, std::vector<std::string>& into) {
      if (const json* tv = get_field(rec, key, cmap); tv && tv->is_array()) {
        for (const auto& t : *tv) {
          if (t.is_string()) into.push_back(t.get<std::string>());
        }
      }
    };
    merge_tags("hashtags", norm.hashtags);
    merge_tags("mentions", norm.mentions);
    report.urls_stripped += norm.urls;
    report.hashtags_extracted += static_cast<std::int64_t>(norm.hashtags.size());
    report.mentions_extracted += static_cast<std::int64_t>(norm.mentions.size());

    ins_message.bind(1, manifest.dataset_name)
        .bind(2, *id)
        .bind(3, *account)
        .bind(4, format_timestamp(*ts))
        .bind(5, *ts)
        .bind(6, norm.text)
        .bind(7, std::string(message_type_name(type)))
        .bind_opt(8, field_string(rec, "parent_id", cmap))
        .bind_opt(9, field_string(rec, "channel_id", cmap))
        .bind_opt(10, field_string(rec, "language", cmap))
        .bind_opt(11, reactions)
        .bind(12, link_count)
        .bind(13, json(norm.hashtags).dump())
        .bind(14, json(norm.mentions).dump());
    ins_message.exec();
    sqlite3_reset(ins_message.raw());
    sqlite3_clear_bindings(ins_message.raw());
    ++report.messages_accepted;
  }

  // Declared counts are a contract: zero tolerance when provided.
  if (manifest.expected_account_count &&
      *manifest.expected_account_count != report.accounts_accepted) {
    throw UserError("ingest aborted: manifest declares " +
                    std::to_string(*manifest.expected_account_count) + " accounts but " +
                    std::to_string(report.accounts_accepted) + " were accepted");
  }
  if (manifest.expected_message_count &&
      *manifest.expected_message_count != report.messages_accepted) {
    throw UserError("ingest aborted: manifest declares " +
                    std::to_string(*manifest.expected_message_count) + " messages but " +
                    std::to_string(report.messages_accepted) + " were accepted");
  }

  Stmt ins_dataset(db_,
                   "INSERT INTO datasets(name, platform, time_start, time_end, label_semantics, "
                   "manifest_json, ingest_report_json, ingested_at) "
                   "VALUES(?1,?2,?3,?4,?5,?6,?7,?8)");
  ins_dataset.bind(1, manifest.dataset_name)
      .bind(2, std::string(platform_name(manifest.platform)))
      .bind(3, manifest.time_start)
      .bind(4, manifest.time_end)
      .bind(5, manifest.label_semantics)
      .bind(6, manifest.to_json().dump())
      .bind(7, report.to_json().dump())
      .bind(8, now);
  ins_dataset.exec();

  txn.commit();
  return report;
}

bool Store::has_dataset(const std::string& name) {
  Stmt q(db_, "SELECT 1 FROM datasets WHERE name=?1");
  q.bind(1, name);
  return q.step();
}

std::vector<std::string> Store::dataset_names() {
  std::vector<std::string> out;
  Stmt q(db_, "SELECT name FROM datasets ORDER BY name");
  while (q.step()) out.push_back(q.col_text(0));
  return out;
}

std::optional<json> Store::ingest_report(const std::string& dataset) {
  Stmt q(db_, "SELECT ingest_report_json FROM datasets WHERE name=?1");
  q.bind(1, dataset);
  if (!q.step()) return std::nullopt;
  return json::parse(q.col_text(0));
}

SummaryStats Store::dataset_summary(const std::string& dataset) {
  if (!has_dataset(dataset)) throw UserError("unknown dataset: " + dataset);
  SummaryStats s;
  {
    Stmt q(db_, "SELECT COUNT(*), MIN(timestamp_s), MAX(timestamp_s) FROM messages WHERE dataset=?1");
    q.bind(1, dataset);
    q.step();
    s.message_count = q.col_int(0);
    if (s.message_count > 0) {
      s.time_min = q.col_int(1);
      s.time_max = q.col_int(2);
    }
  }
  {
    Stmt q(db_, "SELECT COUNT(*) FROM accounts WHERE dataset=?1");
    q.bind(1, dataset);
    q.step();
    s.account_count = q.col_int(0);
  }
  {
    Stmt q(db_, "SELECT label, COUNT(*) FROM accounts WHERE dataset=?1 GROUP BY label");
    q.bind(1, dataset);
    while (q.step()) {
      const std::string label = q.col_text(0);
      if (label == "positive") s.labeled_positive_count = q.col_int(1);
      if (label == "negative") s.labeled_negative_count = q.col_int(1);
    }
  }
  {
    Stmt q(db_,
           "SELECT message_type, COUNT(*) FROM messages WHERE dataset=?1 GROUP BY message_type");
    q.bind(1, dataset);
    while (q.step()) s.messages_by_type[q.col_text(0)] = q.col_int(1);
  }
  {
    Stmt q(db_,
           "SELECT substr(timestamp,1,10) AS day, COUNT(*) FROM messages WHERE dataset=?1 "
           "GROUP BY day ORDER BY day");
    q.bind(1, dataset);
    while (q.step()) s.messages_per_day.emplace_back(q.col_text(0), q.col_int(1));
  }
  return s;
}

std::map<std::string, Label> Store::labeled_accounts(const std::string& dataset) {
  std::map<std::string, Label> out;
  Stmt q(db_, "SELECT account_id, label FROM accounts WHERE dataset=?1 AND label != 'unlabeled'");
  q.bind(1, dataset);
  while (q.step()) {
    out[q.col_text(0)] = q.col_text(1) == "positive" ? Label::positive : Label::negative;
  }
  return out;
}

// ---------------------------------------------------------------------------
// sandboxed queries
// ---------------------------------------------------------------------------

void Store::scope_queries_to(const std::string& dataset) { scope_ = dataset; }

void Store::ensure_read_connection() {
  if (read_db_) return;
  if (sqlite3_open_v2(path_.c_str(), &read_db_, SQLITE_OPEN_READONLY, nullptr) != SQLITE_OK) {
    const std::string msg = read_db_ ? sqlite3_errmsg(read_db_) : "out of memory";
    throw StoreError("cannot open read-only connection: " + msg);
  }
  sqlite3_busy_timeout(read_db_, 10000);
  sqlite3_set_authorizer(read_db_, store_authorizer_thunk, this);
  sqlite3_progress_handler(read_db_, 500, store_progress_thunk, this);
}

void Store::apply_scope_views() {
  if (applied_scope_views_ == scope_) return;
  read_setup_mode_ = true;
  try {
    exec_sql(read_db_, "DROP VIEW IF EXISTS temp.accounts");
    exec_sql(read_db_, "DROP VIEW IF EXISTS temp.messages");
    if (!scope_.empty()) {
      const std::string lit = quote_sql_literal(scope_);
      // Temp views shadow the main tables, so unqualified names in provider
      // SQL see exactly one dataset.
      exec_sql(read_db_, ("CREATE TEMP VIEW accounts AS SELECT * FROM main.accounts WHERE "
                          "dataset = " + lit).c_str());
      exec_sql(read_db_, ("CREATE TEMP VIEW messages AS SELECT * FROM main.messages WHERE "
                          "dataset = " + lit).c_str());
    }
  } catch (...) {
    read_setup_mode_ = false;
    applied_scope_views_.clear();
    throw;
  }
  read_setup_mode_ = false;
  applied_scope_views_ = scope_;
}

Table Store::run_readonly_query(const std::string& sql, const QueryLimits& limits) {
  const SandboxCheck gate = check_readonly_sql(sql);
  if (!gate.ok) {
    throw SandboxError("query rejected: " + gate.reason +
                           (gate.token.empty() ? "" : " ('" + gate.token + "')"),
                       gate.token);
  }
  ensure_read_connection();
  apply_scope_views();

  sqlite3_stmt* stmt = nullptr;
  const char* tail = nullptr;
  const int rc = sqlite3_prepare_v2(read_db_, sql.c_str(), -1, &stmt, &tail);
  if (rc != SQLITE_OK) {
    const std::string msg = sqlite3_errmsg(read_db_);
    if (rc == SQLITE_AUTH || msg.find("not authorized") != std::string::npos) {
      throw SandboxError("query rejected: not authorized (" + msg + ")", "");
    }
    throw Error("query error: " + msg);
  }
  // The gate already rejects multi-statement text; this is the backstop.
  if (tail) {
    for (const char* p = tail; *p; ++p) {
      if (!std::isspace(static_cast<unsigned char>(*p)) && *p != ';') {
        sqlite3_finalize(stmt);
        throw SandboxError("query rejected: multiple statements", ";");
      }
    }
  }

  Table out;
  const int ncols = sqlite3_column_count(stmt);
  for (int i = 0; i < ncols; ++i) {
    const char* name = sqlite3_column_name(stmt, i);
    out.columns.push_back(name ? name : "");
  }

  read_deadline_ms_ = steady_ms() + limits.timeout_ms;
  int step_rc;
  while ((step_rc = sqlite3_step(stmt)) == SQLITE_ROW) {
    if (static_cast<std::int64_t>(out.rows.size()) >= limits.max_rows) {
      out.truncated = true;
      break;
    }
    std::vector<Cell> row;
    row.reserve(ncols);
    for (int i = 0; i < ncols; ++i) {
      switch (sqlite3_column_type(stmt, i)) {
        case SQLITE_INTEGER:
          row.emplace_back(static_cast<std::int64_t>(sqlite3_column_int64(stmt, i)));
          break;
        case SQLITE_FLOAT:
          row.emplace_back(sqlite3_column_double(stmt, i));
          break;
        case SQLITE_NULL:
          row.emplace_back(std::monostate{});
          break;
        default: {
          const unsigned char* p = sqlite3_column_text(stmt, i);
          row.emplace_back(std::string(p ? reinterpret_cast<const char*>(p) : ""));
          break;
        }
      }
    }
    out.rows.push_back(std::move(row));
  }
  read_deadline_ms_ = 0;
  const bool interrupted = step_rc == SQLITE_INTERRUPT;
  const bool failed = step_rc != SQLITE_DONE && step_rc != SQLITE_ROW && !interrupted;
  std::string errmsg = failed || interrupted ? sqlite3_errmsg(read_db_) : "";
  sqlite3_finalize(stmt);
  if (interrupted || errmsg == "interrupted") {
    throw Error("query timeout after " + std::to_string(limits.timeout_ms) + " ms");
  }
  if (failed) throw Error("query error: " + errmsg);
  return out;
}

// ---------------------------------------------------------------------------
// runs and iterations
// ---------------------------------------------------------------------------

std::int64_t Store::create_run(const std::string& dataset, const json& config,
                               const std::string& config_hash, int max_iterations) {
  Txn txn(db_);
  Stmt ins(db_,
           "INSERT INTO runs(dataset, status, next_iteration, max_iterations, config_json, "
           "config_hash, created_at) VALUES(?1,'running',1,?2,?3,?4,?5)");
  ins.bind(1, dataset)
      .bind(2, max_iterations)
      .bind(3, config.dump())
      .bind(4, config_hash)
      .bind(5, now_epoch_seconds());
  ins.exec();
  const std::int64_t id = sqlite3_last_insert_rowid(db_);
  txn.commit();
  return id;
}

static RunRow run_from_stmt(Stmt& q) {
  RunRow r;
  r.run_id = q.col_int(0);
  r.dataset = q.col_text(1);
  r.status = q.col_text(2);
  r.next_iteration = static_cast<int>(q.col_int(3));
  r.max_iterations = static_cast<int>(q.col_int(4));
  r.config = json::parse(q.col_text(5));
  r.config_hash = q.col_text(6);
  r.created_at = q.col_int(7);
  r.completed_at = q.col_opt_int(8);
  r.wall_ms = q.col_double(9);
  return r;
}

static const char* kRunCols =
    "run_id, dataset, status, next_iteration, max_iterations, config_json, config_hash, "
    "created_at, completed_at, wall_ms";

std::optional<RunRow> Store::load_run(std::int64_t run_id) {
  Stmt q(db_, std::string("SELECT ") + kRunCols + " FROM runs WHERE run_id=?1");
  q.bind(1, run_id);
  if (!q.step()) return std::nullopt;
  return run_from_stmt(q);
}

std::vector<RunRow> Store::runs_by_ids(const std::vector<std::int64_t>& ids) {
  std::vector<RunRow> out;
  for (const auto id : ids) {
    auto r = load_run(id);
    if (!r) throw UserError("unknown run id: " + std::to_string(id));
    out.push_back(std::move(*r));
  }
  return out;
}

void Store::set_run_status(std::int64_t run_id, const std::string& status) {
  Txn txn(db_);
  Stmt up(db_, "UPDATE runs SET status=?2, completed_at=?3 WHERE run_id=?1");
  up.bind(1, run_id).bind(2, status);
  if (status == "running") {
    up.bind_null(3);
  } else {
    up.bind(3, now_epoch_seconds());
  }
  up.exec();
  txn.commit();
}

RunRow Store::prepare_resume(std::int64_t run_id) {
  auto run = load_run(run_id);
  if (!run) throw UserError("unknown run id: " + std::to_string(run_id));
  Txn txn(db_);
  // Drop anything a dead process may have left at or past the frontier.
  Stmt del_ver(db_,
               "DELETE FROM verifications WHERE evidence_id IN (SELECT evidence_id FROM "
               "atomic_evidence WHERE run_id=?1 AND iteration_index>=?2)");
  del_ver.bind(1, run_id).bind(2, run->next_iteration);
  del_ver.exec();
  for (const char* sql : {"DELETE FROM atomic_evidence WHERE run_id=?1 AND iteration_index>=?2",
                          "DELETE FROM findings WHERE run_id=?1 AND iteration_index>=?2",
                          "DELETE FROM provider_calls WHERE run_id=?1 AND iteration_index>=?2",
                          "DELETE FROM iterations WHERE run_id=?1 AND iteration_index>=?2"}) {
    Stmt del(db_, sql);
    del.bind(1, run_id).bind(2, run->next_iteration);
    del.exec();
  }
  txn.commit();
  return *run;
}

void Store::commit_iteration(const IterationCommit& commit) {
  const auto& row = commit.row;
  Txn txn(db_);

  Stmt ins(db_,
           "INSERT INTO iterations(run_id, iteration_index, mode, status, technique_id, error, "
           "summary_json, duration_ms) VALUES(?1,?2,?3,?4,?5,?6,?7,?8)");
  ins.bind(1, row.run_id).bind(2, row.iteration_index);
  if (row.mode.empty()) {
    ins.bind_null(3);
  } else {
    ins.bind(3, row.mode);
  }
  ins.bind(4, row.status);
  if (row.technique_id.empty()) {
    ins.bind_null(5);
  } else {
    ins.bind(5, row.technique_id);
  }
  if (row.error.empty()) {
    ins.bind_null(6);
  } else {
    ins.bind(6, row.error);
  }
  if (row.summary) {
    ins.bind(7, row.summary->dump());
  } else {
    ins.bind_null(7);
  }
  ins.bind(8, row.duration_ms);
  ins.exec();

  if (commit.finding) {
    Finding f = *commit.finding;
    const std::int64_t fid = insert_finding_locked(f);
    for (AtomicClaim claim : commit.claims) {
      claim.finding_id = fid;
      insert_claim_locked(claim);
    }
  } else if (!commit.claims.empty()) {
    throw StoreError("claims cannot be committed without a finding");
  }

  for (const auto& call : commit.calls) {
    insert_call_locked(row.run_id, row.iteration_index, call);
  }

  auto run = load_run(row.run_id);
  if (!run) throw StoreError("run vanished during iteration commit");
  const int next = row.iteration_index + 1;
  const bool complete = row.iteration_index >= run->max_iterations;
  Stmt up(db_,
          "UPDATE runs SET next_iteration=?2, wall_ms=wall_ms+?3, status=?4, "
          "completed_at=CASE WHEN ?4='complete' THEN ?5 ELSE completed_at END WHERE run_id=?1");
  up.bind(1, row.run_id)
      .bind(2, next)
      .bind(3, row.duration_ms)
      .bind(4, std::string(complete ? "complete" : "running"))
      .bind(5, now_epoch_seconds());
  up.exec();

  txn.commit();
}

std::vector<IterationRow> Store::iterations_for_run(std::int64_t run_id) {
  std::vector<IterationRow> out;
  Stmt q(db_,
         "SELECT iteration_index, mode, status, technique_id, error, summary_json, duration_ms "
         "FROM iterations WHERE run_id=?1 ORDER BY iteration_index");
  q.bind(1, run_id);
  while (q.step()) {
    IterationRow r;
    r.run_id = run_id;
    r.iteration_index = static_cast<int>(q.col_int(0));
    r.mode = q.col_text(1);
    r.status = q.col_text(2);
    r.technique_id = q.col_text(3);
    r.error = q.col_text(4);
    if (!q.is_null(5)) r.summary = json::parse(q.col_text(5));
    r.duration_ms = q.col_double(6);
    out.push_back(std::move(r));
  }
  return out;
}

std::optional<SummaryStats> Store::iteration1_summary(std::int64_t run_id) {
  Stmt q(db_, "SELECT summary_json FROM iterations WHERE run_id=?1 AND iteration_index=1");
  q.bind(1, run_id);
  if (!q.step() || q.is_null(0)) return std::nullopt;
  return SummaryStats::from_json(json::parse(q.col_text(0)));
}

std::vector<FindingSummary> Store::history(std::int64_t run_id, int before_iteration) {
  std::vector<FindingSummary> out;
  Stmt q(db_,
         "SELECT i.iteration_index, i.status, i.technique_id, f.technique_id, f.evidence_type, "
         "f.signal_strength, f.status FROM iterations i LEFT JOIN findings f ON "
         "f.run_id=i.run_id AND f.iteration_index=i.iteration_index WHERE i.run_id=?1 AND "
         "i.iteration_index>=2 AND i.iteration_index<?2 ORDER BY i.iteration_index");
  q.bind(1, run_id).bind(2, before_iteration);
  while (q.step()) {
    FindingSummary s;
    s.iteration_index = static_cast<int>(q.col_int(0));
    if (!q.is_null(3)) {
      s.technique_id = q.col_text(3);
      s.evidence_type = q.col_text(4);
      s.signal_strength = q.col_double(5);
      s.status = q.col_text(6);
    } else {
      // failed round: no finding, but the slot is part of the history
      s.technique_id = q.col_text(2);
      s.status = "ERROR";
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::map<std::string, TechniqueStat> Store::technique_stats(std::int64_t run_id) {
  std::map<std::string, TechniqueStat> out;
  Stmt q(db_,
         "SELECT technique_id, COUNT(*), AVG(signal_strength), MAX(signal_strength) FROM findings "
         "WHERE run_id=?1 GROUP BY technique_id");
  q.bind(1, run_id);
  while (q.step()) {
    TechniqueStat s;
    s.times_tested = q.col_int(1);
    s.mean_signal = q.col_double(2);
    s.max_signal = q.col_double(3);
    out[q.col_text(0)] = s;
  }
  return out;
}

// ---------------------------------------------------------------------------
// findings and claims
// ---------------------------------------------------------------------------

std::int64_t Store::insert_finding_locked(Finding& f) {
  // Every metric must be declared by the plan that produced it.
  std::set<std::string> declared;
  for (const auto& m : f.plan.metrics) declared.insert(m.name);
  for (const auto& [name, _] : f.metrics.values) {
    if (!declared.count(name)) {
      throw ValidationError("finding rejected: metric '" + name + "' not declared in plan",
                            {"undeclared metric: " + name});
    }
  }
  for (const auto& [name, _] : f.metrics.unavailable) {
    if (!declared.count(name)) {
      throw ValidationError("finding rejected: metric '" + name + "' not declared in plan",
                            {"undeclared metric: " + name});
    }
  }
  if (f.iteration_index < 2) {
    throw ValidationError("finding rejected: iteration 1 is EDA-only",
                          {"findings are not allowed in iteration 1"});
  }

  Stmt ins(db_,
           "INSERT INTO findings(run_id, iteration_index, technique_id, evidence_type, "
           "hypothesis, metrics_json, signal_strength, status, query_log_json, plan_json) "
           "VALUES(?1,?2,?3,?4,?5,?6,?7,?8,?9,?10)");
  ins.bind(1, f.run_id)
      .bind(2, f.iteration_index)
      .bind(3, f.technique_id)
      .bind(4, f.evidence_type)
      .bind(5, f.hypothesis)
      .bind(6, metric_outcome_to_json(f.metrics).dump())
      .bind(7, f.signal_strength)
      .bind(8, std::string(finding_status_name(f.status)))
      .bind(9, query_log_to_json(f.query_log).dump())
      .bind(10, plan_to_json(f.plan).dump());
  try {
    ins.exec();
  } catch (const StoreError& e) {
    if (std::string(e.what()).find("UNIQUE") != std::string::npos) {
      throw ValidationError("finding rejected: a finding already exists for run " +
                                std::to_string(f.run_id) + " iteration " +
                                std::to_string(f.iteration_index),
                            {"duplicate (run, iteration) finding"});
    }
    throw;
  }
  f.finding_id = sqlite3_last_insert_rowid(db_);
  return f.finding_id;
}

std::int64_t Store::persist_finding(Finding& finding) {
  Txn txn(db_);
  const std::int64_t id = insert_finding_locked(finding);
  txn.commit();
  return id;
}

void Store::insert_claim_locked(AtomicClaim& claim) {
  Stmt ins(db_,
           "INSERT INTO atomic_evidence(finding_id, run_id, iteration_index, ordinal, "
           "technique_id, claim_text, evidence_type, strength, condition_json, "
           "explicit_threshold) VALUES(?1,?2,?3,?4,?5,?6,?7,?8,?9,?10)");
  ins.bind(1, claim.finding_id)
      .bind(2, claim.run_id)
      .bind(3, claim.iteration_index)
      .bind(4, claim.ordinal)
      .bind(5, claim.technique_id)
      .bind(6, claim.draft.claim_text)
      .bind(7, std::string(evidence_category_name(claim.draft.category)))
      .bind(8, std::string(claim_strength_name(claim.draft.strength)))
      .bind(9, condition_to_json(claim.draft.condition).dump())
      .bind(10, claim.explicit_threshold ? 1 : 0);
  ins.exec();
  claim.evidence_id = sqlite3_last_insert_rowid(db_);
}

void Store::insert_call_locked(std::int64_t run_id, int iteration,
                               const ProviderCallRecord& rec) {
  Stmt ins(db_,
           "INSERT INTO provider_calls(run_id, iteration_index, provider, phase, status, "
           "latency_ms, prompt_tokens, completion_tokens, request_json, response_json, "
           "created_at) VALUES(?1,?2,?3,?4,?5,?6,?7,?8,?9,?10,?11)");
  ins.bind(1, run_id)
      .bind(2, iteration)
      .bind(3, rec.provider)
      .bind(4, rec.phase)
      .bind(5, rec.status)
      .bind(6, rec.latency_ms)
      .bind_opt(7, rec.prompt_tokens)
      .bind_opt(8, rec.completion_tokens)
      .bind(9, rec.request_json)
      .bind(10, rec.response_json)
      .bind(11, now_epoch_seconds());
  ins.exec();
}

static const char* kFindingCols =
    "finding_id, run_id, iteration_index, technique_id, evidence_type, hypothesis, metrics_json, "
    "signal_strength, status, query_log_json, plan_json";

static Finding finding_from_stmt(Stmt& q) {
  Finding f;
  f.finding_id = q.col_int(0);
  f.run_id = q.col_int(1);
  f.iteration_index = static_cast<int>(q.col_int(2));
  f.technique_id = q.col_text(3);
  f.evidence_type = q.col_text(4);
  f.hypothesis = q.col_text(5);
  f.metrics = metric_outcome_from_json(json::parse(q.col_text(6)));
  f.signal_strength = q.col_double(7);
  const std::string status = q.col_text(8);
  f.status = status == "PASS" ? FindingStatus::PASS
             : status == "INCONCLUSIVE" ? FindingStatus::INCONCLUSIVE
                                        : FindingStatus::FAIL;
  f.query_log = query_log_from_json(json::parse(q.col_text(9)));
  f.plan = plan_from_json(json::parse(q.col_text(10)));
  return f;
}

std::vector<Finding> Store::findings_for_run(std::int64_t run_id) {
  std::vector<Finding> out;
  Stmt q(db_, std::string("SELECT ") + kFindingCols +
                  " FROM findings WHERE run_id=?1 ORDER BY iteration_index");
  q.bind(1, run_id);
  while (q.step()) out.push_back(finding_from_stmt(q));
  return out;
}

std::optional<Finding> Store::finding_by_id(std::int64_t finding_id) {
  Stmt q(db_, std::string("SELECT ") + kFindingCols + " FROM findings WHERE finding_id=?1");
  q.bind(1, finding_id);
  if (!q.step()) return std::nullopt;
  return finding_from_stmt(q);
}

static const char* kClaimCols =
    "evidence_id, finding_id, run_id, iteration_index, ordinal, technique_id, claim_text, "
    "evidence_type, strength, condition_json, explicit_threshold";

static AtomicClaim claim_from_stmt(Stmt& q) {
  AtomicClaim c;
  c.evidence_id = q.col_int(0);
  c.finding_id = q.col_int(1);
  c.run_id = q.col_int(2);
  c.iteration_index = static_cast<int>(q.col_int(3));
  c.ordinal = static_cast<int>(q.col_int(4));
  c.technique_id = q.col_text(5);
  c.draft.claim_text = q.col_text(6);
  c.draft.category =
      parse_evidence_category(q.col_text(7)).value_or(EvidenceCategory::quantitative_metric);
  c.draft.strength = parse_claim_strength(q.col_text(8)).value_or(ClaimStrength::weak);
  c.draft.condition = condition_from_json(json::parse(q.col_text(9)));
  c.explicit_threshold = q.col_int(10) != 0;
  return c;
}

std::vector<AtomicClaim> Store::claims_for_run(std::int64_t run_id) {
  std::vector<AtomicClaim> out;
  Stmt q(db_, std::string("SELECT ") + kClaimCols +
                  " FROM atomic_evidence WHERE run_id=?1 ORDER BY iteration_index, ordinal");
  q.bind(1, run_id);
  while (q.step()) out.push_back(claim_from_stmt(q));
  return out;
}

std::optional<AtomicClaim> Store::claim_by_id(std::int64_t evidence_id) {
  Stmt q(db_, std::string("SELECT ") + kClaimCols + " FROM atomic_evidence WHERE evidence_id=?1");
  q.bind(1, evidence_id);
  if (!q.step()) return std::nullopt;
  return claim_from_stmt(q);
}

std::vector<AtomicClaim> Store::unverified_claims(std::int64_t run_id) {
  std::vector<AtomicClaim> out;
  Stmt q(db_, std::string("SELECT ") + kClaimCols +
                  " FROM atomic_evidence a WHERE a.run_id=?1 AND NOT EXISTS (SELECT 1 FROM "
                  "verifications v WHERE v.evidence_id = a.evidence_id) ORDER BY "
                  "a.iteration_index, a.ordinal");
  q.bind(1, run_id);
  while (q.step()) out.push_back(claim_from_stmt(q));
  return out;
}

// ---------------------------------------------------------------------------
// verifications
// ---------------------------------------------------------------------------

void Store::insert_verification(const VerificationResult& r) {
  Txn txn(db_);
  Stmt ins(db_,
           "INSERT INTO verifications(evidence_id, run_id, tp, fp, fn, tn, odds_ratio, "
           "or_corrected, p_value, crit_explicit, crit_effect, crit_significance, status, error, "
           "verified_at) VALUES(?1,?2,?3,?4,?5,?6,?7,?8,?9,?10,?11,?12,?13,?14,?15)");
  ins.bind(1, r.evidence_id).bind(2, r.run_id);
  if (r.matrix) {
    ins.bind(3, r.matrix->tp).bind(4, r.matrix->fp).bind(5, r.matrix->fn).bind(6, r.matrix->tn);
  } else {
    ins.bind_null(3).bind_null(4).bind_null(5).bind_null(6);
  }
  ins.bind_opt(7, r.odds)
      .bind(8, r.odds_corrected ? 1 : 0)
      .bind_opt(9, r.p_value)
      .bind(10, r.criterion_explicit_threshold ? 1 : 0)
      .bind(11, r.criterion_effect_size ? 1 : 0)
      .bind(12, r.criterion_significance ? 1 : 0)
      .bind(13, std::string(verdict_status_name(r.status)));
  if (r.error.empty()) {
    ins.bind_null(14);
  } else {
    ins.bind(14, r.error);
  }
  ins.bind(15, now_epoch_seconds());
  try {
    ins.exec();
  } catch (const StoreError& e) {
    if (std::string(e.what()).find("UNIQUE") != std::string::npos) {
      throw StoreError("verification already exists for evidence " +
                       std::to_string(r.evidence_id) + " (results are immutable; use --force)");
    }
    throw;
  }
  txn.commit();
}

void Store::delete_verifications(std::int64_t run_id) {
  Txn txn(db_);
  Stmt del(db_, "DELETE FROM verifications WHERE run_id=?1");
  del.bind(1, run_id);
  del.exec();
  txn.commit();
}

static VerificationResult verification_from_stmt(Stmt& q) {
  VerificationResult r;
  r.evidence_id = q.col_int(0);
  r.run_id = q.col_int(1);
  if (!q.is_null(2)) {
    ConfusionMatrix m;
    m.tp = q.col_int(2);
    m.fp = q.col_int(3);
    m.fn = q.col_int(4);
    m.tn = q.col_int(5);
    r.matrix = m;
  }
  r.odds = q.col_opt_double(6);
  r.odds_corrected = q.col_int(7) != 0;
  r.p_value = q.col_opt_double(8);
  r.criterion_explicit_threshold = q.col_int(9) != 0;
  r.criterion_effect_size = q.col_int(10) != 0;
  r.criterion_significance = q.col_int(11) != 0;
  r.status = q.col_text(12) == "PASS" ? VerdictStatus::PASS : VerdictStatus::FAIL;
  r.error = q.is_null(13) ? "" : q.col_text(13);
  return r;
}

static const char* kVerificationCols =
    "evidence_id, run_id, tp, fp, fn, tn, odds_ratio, or_corrected, p_value, crit_explicit, "
    "crit_effect, crit_significance, status, error";

std::vector<VerificationResult> Store::verifications_for_run(std::int64_t run_id) {
  std::vector<VerificationResult> out;
  Stmt q(db_, std::string("SELECT ") + kVerificationCols +
                  " FROM verifications WHERE run_id=?1 ORDER BY evidence_id");
  q.bind(1, run_id);
  while (q.step()) out.push_back(verification_from_stmt(q));
  return out;
}

std::optional<VerificationResult> Store::verification_for_claim(std::int64_t evidence_id) {
  Stmt q(db_, std::string("SELECT ") + kVerificationCols +
                  " FROM verifications WHERE evidence_id=?1");
  q.bind(1, evidence_id);
  if (!q.step()) return std::nullopt;
  return verification_from_stmt(q);
}

// ---------------------------------------------------------------------------
// provider accounting
// ---------------------------------------------------------------------------

std::vector<ProviderCallRow> Store::provider_calls_for_run(std::int64_t run_id) {
  std::vector<ProviderCallRow> out;
  Stmt q(db_,
         "SELECT call_id, iteration_index, provider, phase, status, latency_ms, prompt_tokens, "
         "completion_tokens, request_json, response_json FROM provider_calls WHERE run_id=?1 "
         "ORDER BY call_id");
  q.bind(1, run_id);
  while (q.step()) {
    ProviderCallRow row;
    row.call_id = q.col_int(0);
    row.run_id = run_id;
    row.iteration_index = static_cast<int>(q.col_int(1));
    row.record.provider = q.col_text(2);
    row.record.phase = q.col_text(3);
    row.record.status = q.col_text(4);
    row.record.latency_ms = q.col_double(5);
    row.record.prompt_tokens = q.col_opt_int(6);
    row.record.completion_tokens = q.col_opt_int(7);
    row.record.request_json = q.col_text(8);
    row.record.response_json = q.col_text(9);
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace fimikit
