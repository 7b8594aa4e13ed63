#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace fimikit {

enum class Platform { microblog, messaging_channel, other };
enum class Label { positive, negative, unlabeled };
enum class MessageType { post, repost, reply, comment };

const char* platform_name(Platform p);
std::optional<Platform> parse_platform(const std::string& name);
const char* label_name(Label l);
std::optional<Label> parse_label(const std::string& name);
const char* message_type_name(MessageType t);
std::optional<MessageType> parse_message_type(const std::string& name);

// Unified cross-platform account schema. `label` carries the ground truth
// the verifier tests against: positive = verified IO / bot, negative =
// organic control, unlabeled = excluded from confusion matrices.
struct AccountRecord {
  std::string account_id;
  Platform platform = Platform::other;
  std::optional<std::int64_t> created_at;  // UTC seconds
  std::optional<std::string> display_name;
  std::optional<std::string> profile_description;
  Label label = Label::unlabeled;
};

struct MessageRecord {
  std::string message_id;
  std::string account_id;
  std::int64_t timestamp = 0;  // UTC seconds
  std::string text;
  MessageType message_type = MessageType::post;
  std::optional<std::string> parent_id;
  std::optional<std::string> channel_id;
  std::optional<std::string> language;
  std::optional<std::int64_t> reaction_count;
  std::int64_t link_count = 0;
  std::vector<std::string> hashtags;
  std::vector<std::string> mentions;
};

struct DatasetManifest {
  std::string dataset_name;
  Platform platform = Platform::other;
  std::int64_t time_start = 0;
  std::int64_t time_end = 0;
  std::optional<std::int64_t> expected_account_count;
  std::optional<std::int64_t> expected_message_count;
  std::string label_semantics;
  // Optional renaming of input fields to the unified schema, per file kind.
  std::map<std::string, std::string> account_column_map;
  std::map<std::string, std::string> message_column_map;

  static DatasetManifest load_file(const std::string& path);
  static DatasetManifest from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;
};

struct RejectedRow {
  std::int64_t line = 0;  // 1-based line number in the input file
  std::string id;         // record id when one could be read
  std::string reason;
};

struct IngestReport {
  std::string dataset;
  std::int64_t accounts_input = 0;
  std::int64_t accounts_accepted = 0;
  std::int64_t messages_input = 0;
  std::int64_t messages_accepted = 0;
  std::int64_t labeled_positive = 0;
  std::int64_t labeled_negative = 0;
  std::int64_t unlabeled = 0;
  std::vector<RejectedRow> rejected_accounts;
  std::vector<RejectedRow> rejected_messages;
  // Text normalization applied uniformly at ingest.
  std::int64_t urls_stripped = 0;
  std::int64_t hashtags_extracted = 0;
  std::int64_t mentions_extracted = 0;
  std::int64_t created_at_unparseable = 0;  // accounts stored with absent created_at

  nlohmann::json to_json() const;
};

// Exact counts only; deliberately carries no anomaly indicators — iteration 1
// reports shape, not findings.
struct SummaryStats {
  std::int64_t message_count = 0;
  std::int64_t account_count = 0;
  std::int64_t labeled_positive_count = 0;
  std::int64_t labeled_negative_count = 0;
  std::optional<std::int64_t> time_min;
  std::optional<std::int64_t> time_max;
  std::map<std::string, std::int64_t> messages_by_type;
  std::vector<std::pair<std::string, std::int64_t>> messages_per_day;  // ascending day

  nlohmann::json to_json() const;
  static SummaryStats from_json(const nlohmann::json& doc);
};

// Strips URLs out of `text` (counting them), moves #hashtags and @mentions
// into the out-lists, and collapses runs of whitespace. Used at ingest and
// reported in the IngestReport.
struct NormalizedText {
  std::string text;
  std::int64_t urls = 0;
  std::vector<std::string> hashtags;
  std::vector<std::string> mentions;
};
NormalizedText normalize_message_text(const std::string& text);

}  // namespace fimikit
