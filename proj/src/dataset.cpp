#include "fimikit/dataset.hpp"

#include <cctype>

#include <nlohmann/json.hpp>

#include "fimikit/common.hpp"

namespace fimikit {

using nlohmann::json;

const char* platform_name(Platform p) {
  switch (p) {
    case Platform::microblog: return "microblog";
    case Platform::messaging_channel: return "messaging_channel";
    case Platform::other: return "other";
  }
  return "?";
}

std::optional<Platform> parse_platform(const std::string& s) {
  if (s == "microblog") return Platform::microblog;
  if (s == "messaging_channel") return Platform::messaging_channel;
  if (s == "other") return Platform::other;
  return std::nullopt;
}

const char* label_name(Label l) {
  switch (l) {
    case Label::positive: return "positive";
    case Label::negative: return "negative";
    case Label::unlabeled: return "unlabeled";
  }
  return "?";
}

std::optional<Label> parse_label(const std::string& s) {
  if (s == "positive") return Label::positive;
  if (s == "negative") return Label::negative;
  if (s == "unlabeled" || s.empty()) return Label::unlabeled;
  return std::nullopt;
}

const char* message_type_name(MessageType t) {
  switch (t) {
    case MessageType::post: return "post";
    case MessageType::repost: return "repost";
    case MessageType::reply: return "reply";
    case MessageType::comment: return "comment";
  }
  return "?";
}

std::optional<MessageType> parse_message_type(const std::string& s) {
  if (s == "post" || s.empty()) return MessageType::post;
  if (s == "repost") return MessageType::repost;
  if (s == "reply") return MessageType::reply;
  if (s == "comment") return MessageType::comment;
  return std::nullopt;
}

static std::int64_t require_timestamp(const json& v, const char* what) {
  std::optional<std::int64_t> t;
  if (v.is_number_integer()) {
    t = v.get<std::int64_t>();
  } else if (v.is_string()) {
    t = parse_timestamp(v.get<std::string>());
  }
  if (!t) throw UserError(std::string("manifest: cannot parse ") + what + " as a timestamp");
  return *t;
}

DatasetManifest DatasetManifest::load_file(const std::string& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw UserError("manifest " + path + " is not valid JSON: " + e.what());
  }
  return from_json(doc);
}

DatasetManifest DatasetManifest::from_json(const json& doc) {
  if (!doc.is_object()) throw UserError("manifest must be a JSON object");
  DatasetManifest m;
  m.dataset_name = doc.value("dataset_name", "");
  if (m.dataset_name.empty()) throw UserError("manifest: dataset_name is required");
  auto platform = parse_platform(doc.value("platform", ""));
  if (!platform) {
    throw UserError("manifest: platform must be microblog, messaging_channel or other");
  }
  m.platform = *platform;
  if (!doc.contains("time_range") || !doc["time_range"].is_object()) {
    throw UserError("manifest: time_range {start, end} is required");
  }
  m.time_start = require_timestamp(doc["time_range"].value("start", json()), "time_range.start");
  m.time_end = require_timestamp(doc["time_range"].value("end", json()), "time_range.end");
  if (!(m.time_start < m.time_end)) {
    throw UserError("manifest: time_range.start must precede time_range.end");
  }
  if (doc.contains("expected_account_count") && doc["expected_account_count"].is_number_integer()) {
    m.expected_account_count = doc["expected_account_count"].get<std::int64_t>();
  }
  if (doc.contains("expected_message_count") && doc["expected_message_count"].is_number_integer()) {
    m.expected_message_count = doc["expected_message_count"].get<std::int64_t>();
  }
  m.label_semantics = doc.value("label_semantics", "");
  if (doc.contains("column_map") && doc["column_map"].is_object()) {
    auto read_map = [&](const char* key, std::map<std::string, std::string>& out) {
      if (doc["column_map"].contains(key) && doc["column_map"][key].is_object()) {
        for (const auto& [unified, source] : doc["column_map"][key].items()) {
          if (source.is_string()) out[unified] = source.get<std::string>();
        }
      }
    };
    read_map("accounts", m.account_column_map);
    read_map("messages", m.message_column_map);
  }
  return m;
}

json DatasetManifest::to_json() const {
  json j = {{"dataset_name", dataset_name},
            {"platform", platform_name(platform)},
            {"time_range",
             {{"start", format_timestamp(time_start)}, {"end", format_timestamp(time_end)}}},
            {"label_semantics", label_semantics}};
  if (expected_account_count) j["expected_account_count"] = *expected_account_count;
  if (expected_message_count) j["expected_message_count"] = *expected_message_count;
  if (!account_column_map.empty() || !message_column_map.empty()) {
    json cm = json::object();
    if (!account_column_map.empty()) cm["accounts"] = account_column_map;
    if (!message_column_map.empty()) cm["messages"] = message_column_map;
    j["column_map"] = std::move(cm);
  }
  return j;
}

json IngestReport::to_json() const {
  auto rejected = [](const std::vector<RejectedRow>& rows) {
    json arr = json::array();
    for (const auto& r : rows) {
      arr.push_back({{"line", r.line}, {"id", r.id}, {"reason", r.reason}});
    }
    return arr;
  };
  return json{{"dataset", dataset},
              {"accounts",
               {{"input", accounts_input},
                {"accepted", accounts_accepted},
                {"rejected", rejected(rejected_accounts)}}},
              {"messages",
               {{"input", messages_input},
                {"accepted", messages_accepted},
                {"rejected", rejected(rejected_messages)}}},
              {"labels",
               {{"positive", labeled_positive},
                {"negative", labeled_negative},
                {"unlabeled", unlabeled}}},
              {"normalization",
               {{"urls_stripped", urls_stripped},
                {"hashtags_extracted", hashtags_extracted},
                {"mentions_extracted", mentions_extracted},
                {"created_at_unparseable", created_at_unparseable}}}};
}

json SummaryStats::to_json() const {
  json by_type = json::object();
  for (const auto& [k, v] : messages_by_type) by_type[k] = v;
  json per_day = json::array();
  for (const auto& [day, n] : messages_per_day) per_day.push_back({day, n});
  json time_range;
  if (time_min && time_max) {
    time_range = {{"min", format_timestamp(*time_min)}, {"max", format_timestamp(*time_max)}};
  } else {
    time_range = nullptr;
  }
  return json{{"message_count", message_count},
              {"account_count", account_count},
              {"labeled_positive_count", labeled_positive_count},
              {"labeled_negative_count", labeled_negative_count},
              {"time_range", time_range},
              {"messages_by_type", by_type},
              {"messages_per_day", per_day}};
}

SummaryStats SummaryStats::from_json(const json& doc) {
  SummaryStats s;
  s.message_count = doc.value("message_count", static_cast<std::int64_t>(0));
  s.account_count = doc.value("account_count", static_cast<std::int64_t>(0));
  s.labeled_positive_count = doc.value("labeled_positive_count", static_cast<std::int64_t>(0));
  s.labeled_negative_count = doc.value("labeled_negative_count", static_cast<std::int64_t>(0));
  if (doc.contains("time_range") && doc["time_range"].is_object()) {
    s.time_min = parse_timestamp(doc["time_range"].value("min", ""));
    s.time_max = parse_timestamp(doc["time_range"].value("max", ""));
  }
  if (doc.contains("messages_by_type")) {
    for (const auto& [k, v] : doc["messages_by_type"].items()) {
      if (v.is_number_integer()) s.messages_by_type[k] = v.get<std::int64_t>();
    }
  }
  if (doc.contains("messages_per_day") && doc["messages_per_day"].is_array()) {
    for (const auto& e : doc["messages_per_day"]) {
      if (e.is_array() && e.size() == 2) {
        s.messages_per_day.emplace_back(e[0].get<std::string>(), e[1].get<std::int64_t>());
      }
    }
  }
  return s;
}

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

// trailing punctuation is not part of a tag/mention
std::string trim_token_tail(std::string t) {
  while (!t.empty()) {
    const char c = t.back();
    if (c == '.' || c == ',' || c == '!' || c == '?' || c == ';' || c == ':' || c == ')' ||
        c == '\'' || c == '"') {
      t.pop_back();
    } else {
      break;
    }
  }
  return t;
}

}  // namespace

NormalizedText normalize_message_text(const std::string& text) {
  NormalizedText out;
  std::string result;
  result.reserve(text.size());
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    if (is_space(text[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < n && !is_space(text[j])) ++j;
    const std::string token = text.substr(i, j - i);
    i = j;
    bool drop = false;
    if (token.rfind("http://", 0) == 0 || token.rfind("https://", 0) == 0) {
      ++out.urls;
      drop = true;
    } else if (token.size() > 1 && token[0] == '#') {
      const std::string tag = trim_token_tail(token.substr(1));
      if (!tag.empty()) out.hashtags.push_back(tag);
      drop = true;
    } else if (token.size() > 1 && token[0] == '@') {
      const std::string who = trim_token_tail(token.substr(1));
      if (!who.empty()) out.mentions.push_back(who);
      drop = true;
    }
    if (!drop) {
      if (!result.empty()) result += ' ';
      result += token;
    }
  }
  out.text = std::move(result);
  return out;
}

}  // namespace fimikit
