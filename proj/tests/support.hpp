#pragma once

// Shared fixtures and helpers for the test suites.

#include <cstdio>
#include <filesystem>
#include <random>
#include <string>

#include <nlohmann/json.hpp>

#include "fimikit/common.hpp"
#include "fimikit/store.hpp"
#include "fimikit/synth.hpp"
#include "fimikit/taxonomy.hpp"

namespace testsupport {

using nlohmann::json;

// Unique scratch directory, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::mt19937_64 rng{std::random_device{}()};
    path_ = std::filesystem::temp_directory_path() /
            ("fimikit_test_" + std::to_string(rng()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::int64_t ts(const std::string& text) {
  return *fimikit::parse_timestamp(text);
}

// Tiny two-technique taxonomy used across tests.
inline fimikit::Taxonomy mini_taxonomy() {
  json doc = json::array({
      {{"id", "T0049"}, {"name", "flooding the information space"}, {"tactic_id", "TA17"},
       {"description", "bursty delivery"}},
      {{"id", "T0049.001"}, {"name", "trolls amplify"}, {"tactic_id", "TA17"},
       {"parent_id", "T0049"}, {"description", "troll amplification"}},
      {{"id", "T0049.002"}, {"name", "hijack hashtags"}, {"tactic_id", "TA17"},
       {"parent_id", "T0049"}, {"description", "hashtag hijack"}},
      {{"id", "T0057"}, {"name", "organize events"}, {"tactic_id", "TA10"},
       {"description", "event coordination"}},
  });
  return fimikit::Taxonomy::from_json(doc);
}

// Writes a small labeled dataset directly (no synth): `pos` positive and
// `neg` negative accounts, one message per account at 09:00 on one day.
inline fimikit::IngestReport ingest_tiny_dataset(fimikit::Store& store, const TempDir& dir,
                                                 int pos = 3, int neg = 3) {
  std::string accounts, messages;
  int n = 0;
  for (int i = 0; i < pos + neg; ++i) {
    const std::string id = (i < pos ? "io_" : "org_") + std::to_string(i);
    accounts += json{{"account_id", id},
                     {"label", i < pos ? "positive" : "negative"},
                     {"created_at", "2025-06-01 10:00:00"}}
                    .dump() +
                "\n";
    messages += json{{"message_id", "m" + std::to_string(++n)},
                     {"account_id", id},
                     {"timestamp", "2025-06-02 09:15:00"},
                     {"text", "hello world from " + id}}
                    .dump() +
                "\n";
  }
  fimikit::write_file(dir.file("accounts.jsonl"), accounts);
  fimikit::write_file(dir.file("messages.jsonl"), messages);
  fimikit::DatasetManifest manifest;
  manifest.dataset_name = "tiny";
  manifest.platform = fimikit::Platform::microblog;
  manifest.time_start = ts("2025-06-01 00:00:00");
  manifest.time_end = ts("2025-06-30 00:00:00");
  return store.ingest_dataset(manifest, dir.file("accounts.jsonl"), dir.file("messages.jsonl"));
}

// Small synthetic campaign spec for end-to-end tests; patterns added by the
// caller.
inline fimikit::CampaignSpec small_spec(std::uint64_t seed) {
  fimikit::CampaignSpec spec;
  spec.name = "e2e";
  spec.seed = seed;
  spec.platform = fimikit::Platform::microblog;
  spec.positive_accounts = 60;
  spec.negative_accounts = 200;
  spec.total_messages = 6000;
  spec.time_start = ts("2025-06-01 00:00:00");
  spec.time_end = ts("2025-08-30 00:00:00");  // 90 days
  return spec;
}

}  // namespace testsupport
