#include <catch2/catch_amalgamated.hpp>

#include <nlohmann/json.hpp>

#include "fimikit/common.hpp"
#include "fimikit/store.hpp"
#include "fimikit/synth.hpp"
#include "support.hpp"

using namespace fimikit;
using nlohmann::json;
using testsupport::TempDir;
using testsupport::ts;

namespace {

DatasetManifest manifest_for(const std::string& name,
                             std::optional<std::int64_t> expected_accounts = std::nullopt,
                             std::optional<std::int64_t> expected_messages = std::nullopt) {
  DatasetManifest m;
  m.dataset_name = name;
  m.platform = Platform::microblog;
  m.time_start = ts("2025-06-01 00:00:00");
  m.time_end = ts("2025-06-30 00:00:00");
  m.expected_account_count = expected_accounts;
  m.expected_message_count = expected_messages;
  return m;
}

}  // namespace

TEST_CASE("ingest: declared counts reproduce exactly at corpus scale") {
  // Same shape as the larger of the two reference corpora: 617 positive and
  // 157 negative accounts carrying 40,863 messages.
  TempDir dir;
  std::string accounts, messages;
  const std::int64_t n_pos = 617, n_neg = 157, n_msg = 40863;
  for (std::int64_t i = 0; i < n_pos + n_neg; ++i) {
    accounts += json{{"account_id", "a" + std::to_string(i)},
                     {"label", i < n_pos ? "positive" : "negative"}}
                    .dump() +
                "\n";
  }
  const std::int64_t n_accounts = n_pos + n_neg;
  for (std::int64_t i = 0; i < n_msg; ++i) {
    messages += json{{"message_id", "m" + std::to_string(i)},
                     {"account_id", "a" + std::to_string(i % n_accounts)},
                     {"timestamp", "2025-06-0" + std::to_string(1 + i % 9) + " 12:00:00"},
                     {"text", "post number " + std::to_string(i)}}
                    .dump() +
                "\n";
  }
  write_file(dir.file("accounts.jsonl"), accounts);
  write_file(dir.file("messages.jsonl"), messages);

  Store store(dir.file("store.db"));
  const auto report = store.ingest_dataset(manifest_for("china_shape", n_accounts, n_msg),
                                           dir.file("accounts.jsonl"), dir.file("messages.jsonl"));
  CHECK(report.accounts_accepted == n_accounts);
  CHECK(report.messages_accepted == n_msg);
  CHECK(report.labeled_positive == 617);
  CHECK(report.labeled_negative == 157);

  const auto summary = store.dataset_summary("china_shape");
  CHECK(summary.message_count == n_msg);
  CHECK(summary.labeled_positive_count == 617);
  CHECK(summary.labeled_negative_count == 157);
}

TEST_CASE("ingest: empty messages file with zero expected count is a valid dataset") {
  TempDir dir;
  write_file(dir.file("accounts.jsonl"),
             json{{"account_id", "a1"}, {"label", "positive"}}.dump() + "\n");
  write_file(dir.file("messages.jsonl"), "");
  Store store(dir.file("store.db"));
  const auto report = store.ingest_dataset(manifest_for("empty", 1, 0), dir.file("accounts.jsonl"),
                                           dir.file("messages.jsonl"));
  CHECK(report.messages_input == 0);
  CHECK(report.messages_accepted == 0);
  CHECK(store.has_dataset("empty"));
}

TEST_CASE("ingest: message referencing an unknown account is rejected with a reason") {
  TempDir dir;
  write_file(dir.file("accounts.jsonl"),
             json{{"account_id", "real"}, {"label", "negative"}}.dump() + "\n");
  write_file(dir.file("messages.jsonl"),
             json{{"message_id", "m1"}, {"account_id", "ghost"},
                  {"timestamp", "2025-06-02 10:00:00"}, {"text", "hi"}}
                     .dump() +
                 "\n" +
                 json{{"message_id", "m2"}, {"account_id", "real"},
                      {"timestamp", "2025-06-02 10:00:00"}, {"text", "hello"}}
                     .dump() +
                 "\n");
  Store store(dir.file("store.db"));
  const auto report = store.ingest_dataset(manifest_for("fk"), dir.file("accounts.jsonl"),
                                           dir.file("messages.jsonl"));
  CHECK(report.messages_accepted == 1);
  REQUIRE(report.rejected_messages.size() == 1);
  CHECK(report.rejected_messages[0].id == "m1");
  CHECK(report.rejected_messages[0].reason == "unknown account");
}

TEST_CASE("ingest: totality, timestamp and label validation") {
  TempDir dir;
  std::string accounts;
  accounts += json{{"account_id", "a1"}, {"label", "positive"}}.dump() + "\n";
  accounts += json{{"account_id", "a1"}, {"label", "negative"}}.dump() + "\n";  // duplicate
  accounts += json{{"account_id", ""}}.dump() + "\n";                           // missing id
  accounts += json{{"account_id", "a2"}, {"label", "martian"}}.dump() + "\n";   // bad label
  accounts += json{{"account_id", "a3"}, {"created_at", "3occurred"}}.dump() + "\n";  // unparseable
  accounts += json{{"account_id", "a4"}, {"created_at", "2999-01-01 00:00:00"}}.dump() + "\n";
  accounts += "not json at all\n";
  write_file(dir.file("accounts.jsonl"), accounts);

  std::string messages;
  messages += json{{"message_id", "m1"}, {"account_id", "a1"},
                   {"timestamp", "2025-06-02 09:00:00"}, {"text", "ok"}}
                  .dump() +
              "\n";
  messages += json{{"message_id", "m2"}, {"account_id", "a1"}, {"text", "no timestamp"}}.dump() +
              "\n";
  messages += json{{"message_id", "m3"}, {"account_id", "a1"},
                   {"timestamp", "2030-01-01 00:00:00"}, {"text", "out of range"}}
                  .dump() +
              "\n";
  messages += json{{"message_id", "m4"}, {"account_id", "a1"},
                   {"timestamp", "2025-06-02 09:00:00"}, {"reaction_count", -2}}
                  .dump() +
              "\n";
  write_file(dir.file("messages.jsonl"), messages);

  Store store(dir.file("store.db"));
  const auto report = store.ingest_dataset(manifest_for("messy"), dir.file("accounts.jsonl"),
                                           dir.file("messages.jsonl"));
  // totality: accepted + rejected = input, for both files
  CHECK(report.accounts_input == 7);
  CHECK(report.accounts_accepted + static_cast<std::int64_t>(report.rejected_accounts.size()) ==
        report.accounts_input);
  CHECK(report.messages_input == 4);
  CHECK(report.messages_accepted + static_cast<std::int64_t>(report.rejected_messages.size()) ==
        report.messages_input);
  // a1 ok, a3 kept with dropped created_at; duplicate/missing/bad-label/future/garbage rejected
  CHECK(report.accounts_accepted == 2);
  CHECK(report.created_at_unparseable == 1);
  CHECK(report.messages_accepted == 1);
}

TEST_CASE("ingest: declared-count mismatch is a hard error and nothing persists") {
  TempDir dir;
  write_file(dir.file("accounts.jsonl"),
             json{{"account_id", "a1"}, {"label", "positive"}}.dump() + "\n");
  write_file(dir.file("messages.jsonl"), "");
  Store store(dir.file("store.db"));
  CHECK_THROWS_AS(store.ingest_dataset(manifest_for("bad", 2, 0), dir.file("accounts.jsonl"),
                                       dir.file("messages.jsonl")),
                  UserError);
  CHECK_FALSE(store.has_dataset("bad"));
}

TEST_CASE("ingest: re-ingest of the same dataset replaces it atomically") {
  TempDir dir;
  Store store(dir.file("store.db"));
  testsupport::ingest_tiny_dataset(store, dir, 2, 2);
  const auto before = store.dataset_summary("tiny");
  CHECK(before.account_count == 4);

  // second version has one extra account
  testsupport::ingest_tiny_dataset(store, dir, 3, 2);
  const auto after = store.dataset_summary("tiny");
  CHECK(after.account_count == 5);
  CHECK(after.message_count == 5);
}

TEST_CASE("ingest: text normalization strips URLs and extracts tags uniformly") {
  TempDir dir;
  write_file(dir.file("accounts.jsonl"),
             json{{"account_id", "a1"}, {"label", "positive"}}.dump() + "\n");
  write_file(dir.file("messages.jsonl"),
             json{{"message_id", "m1"},
                  {"account_id", "a1"},
                  {"timestamp", "2025-06-02 09:00:00"},
                  {"text", "watch https://example.com/x and #Rally with @friend now"}}
                     .dump() +
                 "\n");
  Store store(dir.file("store.db"));
  const auto report = store.ingest_dataset(manifest_for("norm"), dir.file("accounts.jsonl"),
                                           dir.file("messages.jsonl"));
  CHECK(report.urls_stripped == 1);
  CHECK(report.hashtags_extracted == 1);
  CHECK(report.mentions_extracted == 1);

  store.scope_queries_to("norm");
  const Table t = store.run_readonly_query(
      "SELECT text, link_count, hashtags, mentions FROM messages", {});
  REQUIRE(t.rows.size() == 1);
  CHECK(std::get<std::string>(t.rows[0][0]) == "watch and with now");
  CHECK(std::get<std::int64_t>(t.rows[0][1]) == 1);
  CHECK(json::parse(std::get<std::string>(t.rows[0][2])) == json::array({"Rally"}));
  CHECK(json::parse(std::get<std::string>(t.rows[0][3])) == json::array({"friend"}));
}

TEST_CASE("ingest: manifest column_map renames input fields") {
  TempDir dir;
  write_file(dir.file("accounts.jsonl"),
             json{{"uid", "a1"}, {"verdict", "positive"}}.dump() + "\n");
  write_file(dir.file("messages.jsonl"),
             json{{"mid", "m1"}, {"uid", "a1"}, {"when", "2025-06-02 09:00:00"},
                  {"body", "mapped"}}
                     .dump() +
                 "\n");
  auto manifest = manifest_for("mapped");
  manifest.account_column_map = {{"account_id", "uid"}, {"label", "verdict"}};
  manifest.message_column_map = {
      {"message_id", "mid"}, {"account_id", "uid"}, {"timestamp", "when"}, {"text", "body"}};
  Store store(dir.file("store.db"));
  const auto report =
      store.ingest_dataset(manifest, dir.file("accounts.jsonl"), dir.file("messages.jsonl"));
  CHECK(report.accounts_accepted == 1);
  CHECK(report.messages_accepted == 1);
  CHECK(report.labeled_positive == 1);
}

TEST_CASE("query: hourly histogram example returns a single 09 row") {
  TempDir dir;
  Store store(dir.file("store.db"));
  testsupport::ingest_tiny_dataset(store, dir, 2, 2);  // all messages at 09:15
  store.scope_queries_to("tiny");
  const Table t = store.run_readonly_query(
      "SELECT strftime('%H', timestamp) AS hour, COUNT(*) AS count FROM messages GROUP BY hour "
      "ORDER BY hour",
      {});
  REQUIRE(t.rows.size() == 1);
  CHECK(std::get<std::string>(t.rows[0][0]) == "09");
  CHECK(std::get<std::int64_t>(t.rows[0][1]) == 4);
}

TEST_CASE("query: COUNT(*) on an empty store is zero") {
  TempDir dir;
  Store store(dir.file("store.db"));
  const Table t = store.run_readonly_query("SELECT COUNT(*) FROM messages", {});
  REQUIRE(t.rows.size() == 1);
  CHECK(std::get<std::int64_t>(t.rows[0][0]) == 0);
}

TEST_CASE("query: DELETE is rejected by the gate") {
  TempDir dir;
  Store store(dir.file("store.db"));
  CHECK_THROWS_AS(store.run_readonly_query("DELETE FROM messages", {}), SandboxError);
}

TEST_CASE("query: scope isolates datasets under the canonical table names") {
  TempDir dir;
  Store store(dir.file("store.db"));
  testsupport::ingest_tiny_dataset(store, dir, 2, 1);  // dataset "tiny", 3 messages

  write_file(dir.file("accounts2.jsonl"),
             json{{"account_id", "z1"}, {"label", "negative"}}.dump() + "\n");
  write_file(dir.file("messages2.jsonl"),
             json{{"message_id", "q1"}, {"account_id", "z1"},
                  {"timestamp", "2025-06-05 12:00:00"}, {"text", "other"}}
                     .dump() +
                 "\n");
  store.ingest_dataset(manifest_for("other"), dir.file("accounts2.jsonl"),
                       dir.file("messages2.jsonl"));

  store.scope_queries_to("tiny");
  auto t = store.run_readonly_query("SELECT COUNT(*) FROM messages", {});
  CHECK(std::get<std::int64_t>(t.rows[0][0]) == 3);
  store.scope_queries_to("other");
  t = store.run_readonly_query("SELECT COUNT(*) FROM messages", {});
  CHECK(std::get<std::int64_t>(t.rows[0][0]) == 1);
  store.scope_queries_to("");
  t = store.run_readonly_query("SELECT COUNT(*) FROM messages", {});
  CHECK(std::get<std::int64_t>(t.rows[0][0]) == 4);
}

TEST_CASE("query: runaway statements hit the timeout") {
  TempDir dir;
  Store store(dir.file("store.db"));
  QueryLimits limits;
  limits.timeout_ms = 100;
  CHECK_THROWS_WITH(
      store.run_readonly_query(
          "WITH RECURSIVE c(x) AS (SELECT 1 UNION ALL SELECT x+1 FROM c) SELECT COUNT(*) FROM c",
          limits),
      Catch::Matchers::ContainsSubstring("timeout"));
}

TEST_CASE("query: row limit flags truncation instead of failing") {
  TempDir dir;
  Store store(dir.file("store.db"));
  QueryLimits limits;
  limits.max_rows = 5;
  const Table t = store.run_readonly_query(
      "WITH RECURSIVE c(x) AS (SELECT 1 UNION ALL SELECT x+1 FROM c WHERE x < 100) SELECT x FROM c",
      limits);
  CHECK(t.truncated);
  CHECK(t.rows.size() == 5);
}

TEST_CASE("query: store file is byte-identical after arbitrary accepted queries") {
  TempDir dir;
  {
    Store store(dir.file("store.db"));
    testsupport::ingest_tiny_dataset(store, dir, 2, 2);
  }
  const std::string before = read_file(dir.file("store.db"));
  {
    Store store(dir.file("store.db"));
    store.scope_queries_to("tiny");
    store.run_readonly_query("SELECT * FROM messages", {});
    store.run_readonly_query("SELECT COUNT(*) FROM accounts WHERE label = 'positive'", {});
  }
  CHECK(read_file(dir.file("store.db")) == before);
}

TEST_CASE("summary: singleton dataset has min = max timestamp") {
  TempDir dir;
  Store store(dir.file("store.db"));
  testsupport::ingest_tiny_dataset(store, dir, 1, 0);  // one account, one message
  const auto s = store.dataset_summary("tiny");
  REQUIRE(s.time_min.has_value());
  CHECK(*s.time_min == *s.time_max);
  CHECK(s.message_count == 1);
}

TEST_CASE("summary: unknown dataset is an error") {
  TempDir dir;
  Store store(dir.file("store.db"));
  CHECK_THROWS_AS(store.dataset_summary("nope"), UserError);
}

TEST_CASE("summary: generator-shaped fixture matches its manifest exactly") {
  // Proportions of the larger messaging-channel corpus scaled by 1/100:
  // 6 verified bots among 303 accounts, 5958 comments, ~14.5% bot share.
  TempDir dir;
  CampaignSpec spec;
  spec.name = "moldova_scaled";
  spec.seed = 17;
  spec.platform = Platform::messaging_channel;
  spec.positive_accounts = 6;
  spec.negative_accounts = 297;
  spec.total_messages = 5958;
  spec.time_start = testsupport::ts("2025-07-01 00:00:00");
  spec.time_end = testsupport::ts("2025-09-30 00:00:00");
  BotCommentSharePattern share;
  share.fraction = 0.145;
  spec.bot_comment_share = share;

  const Campaign campaign = generate_campaign(spec);
  write_campaign(campaign, dir.path().string());
  Store store(dir.file("store.db"));
  store.ingest_dataset(campaign.manifest(), dir.file("accounts.jsonl"),
                       dir.file("messages.jsonl"));
  const auto s = store.dataset_summary("moldova_scaled");
  CHECK(s.account_count == 303);
  CHECK(s.message_count == 5958);
  CHECK(s.labeled_positive_count == 6);
  CHECK(s.labeled_negative_count == 297);
  CHECK(s.account_count == *campaign.manifest().expected_account_count);
}

TEST_CASE("summary: counts agree with the sandboxed query surface") {
  TempDir dir;
  Store store(dir.file("store.db"));
  testsupport::ingest_tiny_dataset(store, dir, 3, 2);
  const auto s = store.dataset_summary("tiny");
  store.scope_queries_to("tiny");
  const Table t = store.run_readonly_query("SELECT COUNT(*) FROM messages", {});
  CHECK(s.message_count == std::get<std::int64_t>(t.rows[0][0]));
  // summary carries exact shape only; no anomaly fields of any kind
  const json j = s.to_json();
  for (const auto& [key, _] : j.items()) {
    CHECK(key.find("anomal") == std::string::npos);
    CHECK(key.find("suspicious") == std::string::npos);
  }
}
