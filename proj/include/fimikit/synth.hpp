#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fimikit/dataset.hpp"

namespace fimikit {

// Deterministic generator of labeled synthetic campaigns. Base generation is
// label-independent in every field; only planted patterns introduce label
// correlation, so a campaign with no patterns (or all zero knobs) carries no
// signal at all.

struct CreationBurstPattern {
  std::int64_t window_start = 0;
  std::int64_t window_end = 0;
  double share_positive = 0.97;  // precision of the planted window
  double coverage = 0.9;         // share of positive accounts created inside; 0 = no-op
};

struct DuplicateCommentsPattern {
  double rate = 0.3;    // share of bot messages replaced with canned texts; 0 = no-op
  int min_length = 12;  // canned texts at least this long
};

struct FloodingBurstPattern {
  int hour = 9;                // UTC hour-of-day
  double concentration = 0.7;  // share of bot messages moved into that hour; 0 = no-op
};

struct BotCommentSharePattern {
  double fraction = 0.145;  // bot messages / total messages; <= 0 = no-op
};

struct CampaignSpec {
  std::string name = "campaign";
  std::uint64_t seed = 1;
  Platform platform = Platform::microblog;
  std::int64_t positive_accounts = 100;
  std::int64_t negative_accounts = 300;
  std::int64_t total_messages = 10000;
  std::int64_t time_start = 0;
  std::int64_t time_end = 0;
  std::optional<CreationBurstPattern> creation_burst;
  std::optional<DuplicateCommentsPattern> duplicate_comments;
  std::optional<FloodingBurstPattern> flooding_burst;
  std::optional<BotCommentSharePattern> bot_comment_share;

  void validate() const;  // throws UserError on infeasible specs
  static CampaignSpec load_file(const std::string& path);
  static CampaignSpec from_json(const nlohmann::json& doc);
};

struct Campaign {
  CampaignSpec spec;
  std::vector<AccountRecord> accounts;
  std::vector<MessageRecord> messages;
  std::vector<nlohmann::json> pattern_reports;  // sidecar entries, plant order
  std::set<std::string> applied_patterns;

  DatasetManifest manifest() const;
  nlohmann::json sidecar() const;
};

// Base campaign plus every pattern the campaign spec declares (fixed plant order:
// bot_comment_share, creation_burst, duplicate_comments, flooding_burst).
Campaign generate_campaign(const CampaignSpec& spec);

// Base campaign without any patterns; exposed for plant_pattern tests.
Campaign generate_base_campaign(const CampaignSpec& spec);

// Applies one pattern to a generated campaign and returns its mutation
// report (also appended to the sidecar). Planting the same pattern type
// twice is an error. `params` uses the same keys as the campaign spec file.
nlohmann::json plant_pattern(Campaign& campaign, const std::string& type,
                             const nlohmann::json& params);

// accounts.jsonl, messages.jsonl, manifest.json, ground_truth.json
void write_campaign(const Campaign& campaign, const std::string& out_dir);

}  // namespace fimikit
