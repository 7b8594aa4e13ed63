#include "fimikit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include "fimikit/common.hpp"

namespace fimikit {

using nlohmann::json;

namespace {

// splitmix64: deterministic across platforms and compilers, which the
// byte-identical-output contract depends on (std:: distributions are not).
struct Rng {
  std::uint64_t state;
  explicit Rng(std::uint64_t seed) : state(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : next() % n; }
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

const std::vector<std::string>& vocabulary() {
  static const std::vector<std::string> words = {
      "election",  "vote",     "candidate", "reform",   "policy",   "citizens", "country",
      "europe",    "economy",  "energy",    "protest",  "media",    "report",   "channel",
      "news",      "support",  "against",   "people",   "truth",    "freedom",  "party",
      "campaign",  "future",   "security",  "crisis",   "price",    "border",   "deal",
      "statement", "minister", "president", "diaspora", "region",   "debate",   "poll",
      "budget",    "pension",  "school",    "hospital", "road"};
  return words;
}

const std::vector<std::string>& profile_phrases() {
  static const std::vector<std::string> phrases = {
      "loves coffee and long walks", "political observer",     "proud parent",
      "news junkie",                 "sports fan",             "local business owner",
      "student",                     "engineer by day"};
  return phrases;
}

// Canned duplicate texts, padded to min_length with filler words.
std::vector<std::string> duplicate_pool(int min_length) {
  std::vector<std::string> pool = {
      "our candidate is the only real choice",
      "do not trust the lying mainstream media",
      "everyone must vote against this corrupt deal",
      "share this before they delete it",
      "the truth they are hiding from you"};
  for (auto& text : pool) {
    while (static_cast<int>(text.size()) < min_length) text += " now";
  }
  return pool;
}

// Diurnal hour weights; deliberately label-independent.
int weighted_hour(Rng& rng) {
  static const int weights[24] = {1, 1, 1, 1, 2, 3, 4, 6, 8, 9, 10, 10,
                                  9, 9, 9, 9, 10, 10, 11, 10, 8, 6, 4, 2};
  static const int total = [] {
    int t = 0;
    for (int w : weights) t += w;
    return t;
  }();
  int r = static_cast<int>(rng.below(total));
  for (int h = 0; h < 24; ++h) {
    r -= weights[h];
    if (r < 0) return h;
  }
  return 23;
}

std::string hex_token(Rng& rng, int digits) {
  static const char* alphabet = "0123456789abcdef";
  std::string s;
  for (int i = 0; i < digits; ++i) s += alphabet[rng.below(16)];
  return s;
}

std::int64_t round_count(double v) { return static_cast<std::int64_t>(std::llround(v)); }

struct PrecisionRecall {
  std::int64_t predicted_positive = 0;
  std::int64_t true_positive = 0;
  double precision = 0.0;
  double recall = 0.0;
};

PrecisionRecall score_predicate(const Campaign& c, const std::set<std::string>& predicted) {
  PrecisionRecall pr;
  std::int64_t positives = 0;
  for (const auto& a : c.accounts) {
    if (a.label == Label::positive) ++positives;
  }
  for (const auto& a : c.accounts) {
    if (!predicted.count(a.account_id)) continue;
    ++pr.predicted_positive;
    if (a.label == Label::positive) ++pr.true_positive;
  }
  pr.precision = pr.predicted_positive == 0
                     ? 0.0
                     : static_cast<double>(pr.true_positive) / pr.predicted_positive;
  pr.recall = positives == 0 ? 0.0 : static_cast<double>(pr.true_positive) / positives;
  return pr;
}

}  // namespace

void CampaignSpec::validate() const {
  if (name.empty()) throw UserError("campaign spec: name is required");
  if (positive_accounts < 1 || negative_accounts < 1) {
    throw UserError("campaign spec: at least one positive and one negative account required");
  }
  if (total_messages < 0) throw UserError("campaign spec: total_messages must be non-negative");
  if (!(time_start < time_end)) throw UserError("campaign spec: time_start must precede time_end");
  if (time_end - time_start < 86400) {
    throw UserError("campaign spec: time range must span at least one day");
  }
  auto check_fraction = [](double v, const char* what) {
    if (v < 0.0 || v > 1.0) throw UserError(std::string("campaign spec: ") + what + " must lie in [0, 1]");
  };
  if (creation_burst) {
    check_fraction(creation_burst->share_positive, "creation_burst.share_positive");
    check_fraction(creation_burst->coverage, "creation_burst.coverage");
    if (creation_burst->coverage > 0.0) {
      if (!(creation_burst->window_start < creation_burst->window_end)) {
        throw UserError("campaign spec: creation_burst window is empty");
      }
      if (creation_burst->window_start < time_start || creation_burst->window_end > time_end) {
        throw UserError("campaign spec: creation_burst window must lie within the time range");
      }
      if (creation_burst->share_positive <= 0.0) {
        throw UserError("campaign spec: creation_burst.share_positive must be positive");
      }
    }
  }
  if (duplicate_comments) check_fraction(duplicate_comments->rate, "duplicate_comments.rate");
  if (flooding_burst) {
    check_fraction(flooding_burst->concentration, "flooding_burst.concentration");
    if (flooding_burst->hour < 0 || flooding_burst->hour > 23) {
      throw UserError("campaign spec: flooding_burst.hour must be 0..23");
    }
  }
  if (bot_comment_share) check_fraction(bot_comment_share->fraction, "bot_comment_share.fraction");
}

CampaignSpec CampaignSpec::load_file(const std::string& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw UserError("campaign spec " + path + " is not valid JSON: " + e.what());
  }
  return from_json(doc);
}

static std::int64_t spec_timestamp(const json& v, const char* what) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_string()) {
    auto t = parse_timestamp(v.get<std::string>());
    if (t) return *t;
  }
  throw UserError(std::string("campaign spec: cannot parse ") + what + " as a timestamp");
}

CampaignSpec CampaignSpec::from_json(const json& doc) {
  CampaignSpec s;
  s.name = doc.value("name", "campaign");
  s.seed = doc.value("seed", static_cast<std::uint64_t>(1));
  if (doc.contains("platform")) {
    auto p = parse_platform(doc.value("platform", ""));
    if (!p) throw UserError("campaign spec: bad platform");
    s.platform = *p;
  }
  if (doc.contains("accounts") && doc["accounts"].is_object()) {
    s.positive_accounts = doc["accounts"].value("positive", static_cast<std::int64_t>(100));
    s.negative_accounts = doc["accounts"].value("negative", static_cast<std::int64_t>(300));
  }
  if (doc.contains("messages") && doc["messages"].is_object()) {
    s.total_messages = doc["messages"].value("total", static_cast<std::int64_t>(10000));
  }
  if (!doc.contains("time_range") || !doc["time_range"].is_object()) {
    throw UserError("campaign spec: time_range {start, end} is required");
  }
  s.time_start = spec_timestamp(doc["time_range"].value("start", json()), "time_range.start");
  s.time_end = spec_timestamp(doc["time_range"].value("end", json()), "time_range.end");

  if (doc.contains("patterns") && doc["patterns"].is_array()) {
    for (const auto& p : doc["patterns"]) {
      const std::string type = p.value("type", "");
      if (type == "creation_burst") {
        CreationBurstPattern cb;
        if (!p.contains("window") || !p["window"].is_object()) {
          throw UserError("campaign spec: creation_burst requires a window");
        }
        cb.window_start = spec_timestamp(p["window"].value("start", json()), "window.start");
        cb.window_end = spec_timestamp(p["window"].value("end", json()), "window.end");
        cb.share_positive = p.value("share_positive", 0.97);
        cb.coverage = p.value("coverage", 0.9);
        s.creation_burst = cb;
      } else if (type == "duplicate_comments") {
        DuplicateCommentsPattern d;
        d.rate = p.value("rate", 0.3);
        d.min_length = p.value("min_length", 12);
        s.duplicate_comments = d;
      } else if (type == "flooding_burst") {
        FloodingBurstPattern f;
        f.hour = p.value("hour", 9);
        f.concentration = p.value("concentration", 0.7);
        s.flooding_burst = f;
      } else if (type == "bot_comment_share") {
        BotCommentSharePattern b;
        b.fraction = p.value("fraction", 0.145);
        s.bot_comment_share = b;
      } else {
        throw UserError("campaign spec: unknown pattern type '" + type + "'");
      }
    }
  }
  s.validate();
  return s;
}

DatasetManifest Campaign::manifest() const {
  DatasetManifest m;
  m.dataset_name = spec.name;
  m.platform = spec.platform;
  m.time_start = spec.time_start;
  m.time_end = spec.time_end;
  m.expected_account_count = static_cast<std::int64_t>(accounts.size());
  m.expected_message_count = static_cast<std::int64_t>(messages.size());
  m.label_semantics =
      "synthetic campaign: positive = planted coordinated accounts, negative = organic";
  return m;
}

json Campaign::sidecar() const {
  std::int64_t positives = 0, negatives = 0;
  for (const auto& a : accounts) {
    if (a.label == Label::positive) ++positives;
    if (a.label == Label::negative) ++negatives;
  }
  return json{{"dataset_name", spec.name},
              {"seed", spec.seed},
              {"counts",
               {{"accounts", accounts.size()},
                {"positive", positives},
                {"negative", negatives},
                {"messages", messages.size()}}},
              {"patterns", pattern_reports}};
}

Campaign generate_base_campaign(const CampaignSpec& spec) {
  spec.validate();
  Campaign c;
  c.spec = spec;
  Rng rng(spec.seed);

  const std::int64_t span = spec.time_end - spec.time_start;
  const std::int64_t days = span / 86400;

  auto make_account = [&](const std::string& id, Label label) {
    AccountRecord a;
    a.account_id = id;
    a.platform = spec.platform;
    a.label = label;
    a.created_at = spec.time_start + static_cast<std::int64_t>(rng.below(span));
    a.display_name = "user_" + hex_token(rng, 6);
    if (rng.unit() < 0.7) {
      a.profile_description = profile_phrases()[rng.below(profile_phrases().size())];
    } else {
      a.profile_description = "";
    }
    return a;
  };
  char buf[32];
  for (std::int64_t i = 1; i <= spec.positive_accounts; ++i) {
    std::snprintf(buf, sizeof(buf), "io_%05lld", static_cast<long long>(i));
    c.accounts.push_back(make_account(buf, Label::positive));
  }
  for (std::int64_t i = 1; i <= spec.negative_accounts; ++i) {
    std::snprintf(buf, sizeof(buf), "org_%05lld", static_cast<long long>(i));
    c.accounts.push_back(make_account(buf, Label::negative));
  }

  static const char* langs[3] = {"en", "ro", "ru"};
  const std::int64_t total_accounts = spec.positive_accounts + spec.negative_accounts;
  for (std::int64_t i = 1; i <= spec.total_messages; ++i) {
    MessageRecord m;
    std::snprintf(buf, sizeof(buf), "m%07lld", static_cast<long long>(i));
    m.message_id = buf;
    m.account_id = c.accounts[rng.below(total_accounts)].account_id;

    const std::int64_t day = static_cast<std::int64_t>(rng.below(days));
    const int hour = weighted_hour(rng);
    m.timestamp = spec.time_start + day * 86400 + hour * 3600 +
                  static_cast<std::int64_t>(rng.below(3600));

    const int type_roll = static_cast<int>(rng.below(100));
    m.message_type = type_roll < 70   ? MessageType::post
                     : type_roll < 85 ? MessageType::reply
                     : type_roll < 95 ? MessageType::repost
                                      : MessageType::comment;

    if (m.message_type == MessageType::repost && rng.unit() < 0.5) {
      m.text = "";  // pure reshare
    } else {
      const int nwords = 6 + static_cast<int>(rng.below(12));
      std::string text;
      for (int w = 0; w < nwords; ++w) {
        if (w) text += ' ';
        text += vocabulary()[rng.below(vocabulary().size())];
      }
      m.text = text;
    }
    if ((m.message_type == MessageType::reply || m.message_type == MessageType::comment) &&
        i > 1 && rng.unit() < 0.8) {
      std::snprintf(buf, sizeof(buf), "m%07lld", static_cast<long long>(1 + rng.below(i - 1)));
      m.parent_id = buf;
    }
    if (spec.platform == Platform::messaging_channel) {
      m.channel_id = "ch_" + std::to_string(rng.below(16));
    }
    m.language = langs[rng.below(3)];
    m.reaction_count = static_cast<std::int64_t>(rng.below(7));
    if (!m.text.empty()) {
      if (rng.unit() < 0.10) m.text += " https://example.org/p/" + hex_token(rng, 8);
      if (rng.unit() < 0.15) m.text += " #tag" + std::to_string(rng.below(20));
      if (rng.unit() < 0.10) m.text += " @user" + std::to_string(rng.below(50));
    }
    c.messages.push_back(std::move(m));
  }
  return c;
}

namespace {

json creation_burst_report(Campaign& c, const CreationBurstPattern& p, Rng& rng) {
  if (p.coverage <= 0.0) {
    return json{{"type", "creation_burst"}, {"applied", false}, {"reason", "coverage is zero"}};
  }
  std::vector<AccountRecord*> positives, negatives;
  for (auto& a : c.accounts) {
    (a.label == Label::positive ? positives : negatives).push_back(&a);
  }
  const std::int64_t burst_pos = round_count(p.coverage * static_cast<double>(positives.size()));
  const std::int64_t decoy_neg =
      round_count(static_cast<double>(burst_pos) * (1.0 - p.share_positive) / p.share_positive);
  if (burst_pos > static_cast<std::int64_t>(positives.size())) {
    throw UserError("creation_burst: more burst accounts than positive accounts");
  }
  if (decoy_neg > static_cast<std::int64_t>(negatives.size())) {
    throw UserError("creation_burst: share_positive needs more negative decoys than exist");
  }

  const std::int64_t wlen = p.window_end - p.window_start;
  const std::int64_t before = p.window_start - c.spec.time_start;
  const std::int64_t after = c.spec.time_end - p.window_end;
  auto outside = [&]() -> std::int64_t {
    const std::int64_t r = static_cast<std::int64_t>(rng.below(before + after));
    return r < before ? c.spec.time_start + r : p.window_end + (r - before);
  };

  json affected = json::array();
  json decoys = json::array();
  for (std::size_t i = 0; i < positives.size(); ++i) {
    if (static_cast<std::int64_t>(i) < burst_pos) {
      positives[i]->created_at = p.window_start + static_cast<std::int64_t>(rng.below(wlen));
      affected.push_back(positives[i]->account_id);
    } else {
      positives[i]->created_at = outside();
    }
  }
  for (std::size_t i = 0; i < negatives.size(); ++i) {
    if (static_cast<std::int64_t>(i) < decoy_neg) {
      negatives[i]->created_at = p.window_start + static_cast<std::int64_t>(rng.below(wlen));
      decoys.push_back(negatives[i]->account_id);
    } else {
      negatives[i]->created_at = outside();
    }
  }

  std::set<std::string> predicted;
  for (const auto& a : c.accounts) {
    if (a.created_at && *a.created_at >= p.window_start && *a.created_at < p.window_end) {
      predicted.insert(a.account_id);
    }
  }
  const PrecisionRecall pr = score_predicate(c, predicted);
  const std::string feature_query =
      "SELECT account_id, CASE WHEN created_at_s IS NOT NULL AND created_at_s >= " +
      std::to_string(p.window_start) + " AND created_at_s < " + std::to_string(p.window_end) +
      " THEN 1 ELSE 0 END AS feature_value FROM accounts";
  return json{{"type", "creation_burst"},
              {"applied", true},
              {"window",
               {{"start", format_timestamp(p.window_start)},
                {"end", format_timestamp(p.window_end)},
                {"start_s", p.window_start},
                {"end_s", p.window_end}}},
              {"affected_positive_accounts", affected},
              {"decoy_negative_accounts", decoys},
              {"canonical_condition",
               {{"feature_query", feature_query},
                {"comparator", ">="},
                {"threshold", 1},
                {"description", "account created inside the planted burst window"}}},
              {"precision", pr.precision},
              {"recall", pr.recall}};
}

json duplicate_comments_report(Campaign& c, const DuplicateCommentsPattern& p, Rng& rng) {
  if (p.rate <= 0.0) {
    return json{{"type", "duplicate_comments"}, {"applied", false}, {"reason", "rate is zero"}};
  }
  const auto pool = duplicate_pool(p.min_length);
  std::set<std::string> positive_ids;
  for (const auto& a : c.accounts) {
    if (a.label == Label::positive) positive_ids.insert(a.account_id);
  }
  std::int64_t bot_messages = 0, duplicated = 0;
  json affected_messages = json::array();
  std::set<std::string> affected_accounts;
  for (auto& m : c.messages) {
    if (!positive_ids.count(m.account_id)) continue;
    ++bot_messages;
    if (rng.unit() < p.rate) {
      m.text = pool[rng.below(pool.size())];
      ++duplicated;
      affected_messages.push_back(m.message_id);
      affected_accounts.insert(m.account_id);
    }
  }

  // canonical condition: accounts with more than 3 messages whose text
  // occurs at least 5 times dataset-wide
  std::map<std::string, std::int64_t> text_freq;
  for (const auto& m : c.messages) {
    if (static_cast<int>(m.text.size()) >= p.min_length) ++text_freq[m.text];
  }
  std::map<std::string, std::int64_t> dup_per_account;
  for (const auto& m : c.messages) {
    auto it = text_freq.find(m.text);
    if (it != text_freq.end() && it->second >= 5) ++dup_per_account[m.account_id];
  }
  std::set<std::string> predicted;
  for (const auto& [account, n] : dup_per_account) {
    if (n > 3) predicted.insert(account);
  }
  const PrecisionRecall pr = score_predicate(c, predicted);
  const std::string feature_query =
      "SELECT m.account_id AS account_id, COUNT(*) AS feature_value FROM messages m JOIN "
      "(SELECT text, COUNT(*) AS c FROM messages WHERE length(text) >= " +
      std::to_string(p.min_length) +
      " GROUP BY text HAVING COUNT(*) >= 5) t ON m.text = t.text GROUP BY m.account_id";
  return json{{"type", "duplicate_comments"},
              {"applied", true},
              {"rate", p.rate},
              {"bot_messages", bot_messages},
              {"duplicated_messages", duplicated},
              {"affected_accounts", json(affected_accounts)},
              {"affected_message_ids", affected_messages},
              {"canonical_condition",
               {{"feature_query", feature_query},
                {"comparator", ">"},
                {"threshold", 3},
                {"description", "account posted more than 3 heavily duplicated texts"}}},
              {"precision", pr.precision},
              {"recall", pr.recall}};
}

json flooding_burst_report(Campaign& c, const FloodingBurstPattern& p, Rng& rng) {
  if (p.concentration <= 0.0) {
    return json{{"type", "flooding_burst"}, {"applied", false}, {"reason", "concentration is zero"}};
  }
  std::set<std::string> positive_ids;
  for (const auto& a : c.accounts) {
    if (a.label == Label::positive) positive_ids.insert(a.account_id);
  }
  std::int64_t moved = 0;
  std::set<std::string> affected_accounts;
  for (auto& m : c.messages) {
    if (!positive_ids.count(m.account_id)) continue;
    if (rng.unit() < p.concentration) {
      const std::int64_t day_start = m.timestamp - (m.timestamp % 86400);
      std::int64_t moved_ts = day_start + p.hour * 3600 + static_cast<std::int64_t>(rng.below(3600));
      if (moved_ts >= c.spec.time_end) moved_ts -= 86400;
      if (moved_ts < c.spec.time_start) moved_ts += 86400;
      if (moved_ts < c.spec.time_start || moved_ts >= c.spec.time_end) continue;  // keep in range
      m.timestamp = moved_ts;
      ++moved;
      affected_accounts.insert(m.account_id);
    }
  }

  std::map<std::string, std::pair<std::int64_t, std::int64_t>> per_account;  // in-hour, total
  for (const auto& m : c.messages) {
    auto& [in_hour, total] = per_account[m.account_id];
    ++total;
    if ((m.timestamp % 86400) / 3600 == p.hour) ++in_hour;
  }
  std::set<std::string> predicted;
  for (const auto& [account, counts] : per_account) {
    if (counts.second > 0 &&
        static_cast<double>(counts.first) / static_cast<double>(counts.second) >= 0.5) {
      predicted.insert(account);
    }
  }
  const PrecisionRecall pr = score_predicate(c, predicted);
  char hour_str[8];
  std::snprintf(hour_str, sizeof(hour_str), "%02d", p.hour);
  const std::string feature_query =
      "SELECT account_id, SUM(CASE WHEN strftime('%H', timestamp) = '" + std::string(hour_str) +
      "' THEN 1.0 ELSE 0.0 END) / COUNT(*) AS feature_value FROM messages GROUP BY account_id";
  return json{{"type", "flooding_burst"},
              {"applied", true},
              {"hour", p.hour},
              {"moved_messages", moved},
              {"affected_accounts", json(affected_accounts)},
              {"canonical_condition",
               {{"feature_query", feature_query},
                {"comparator", ">="},
                {"threshold", 0.5},
                {"description", "at least half of the account's messages fall in the flooded hour"}}},
              {"precision", pr.precision},
              {"recall", pr.recall}};
}

json bot_comment_share_report(Campaign& c, const BotCommentSharePattern& p, Rng& rng) {
  if (p.fraction <= 0.0) {
    return json{{"type", "bot_comment_share"}, {"applied", false}, {"reason", "fraction is zero"}};
  }
  std::vector<std::string> positives, negatives;
  for (const auto& a : c.accounts) {
    (a.label == Label::positive ? positives : negatives).push_back(a.account_id);
  }
  const std::int64_t total = static_cast<std::int64_t>(c.messages.size());
  const std::int64_t bot_count = round_count(p.fraction * static_cast<double>(total));
  if (bot_count > total) throw UserError("bot_comment_share: fraction exceeds 1");

  // Reassign authorship: the first bot_count messages (in id order) go to
  // bots, the rest to organic accounts.
  for (std::int64_t i = 0; i < total; ++i) {
    auto& m = c.messages[i];
    if (i < bot_count) {
      m.account_id = positives[rng.below(positives.size())];
    } else {
      m.account_id = negatives[rng.below(negatives.size())];
    }
  }
  const double achieved = total == 0 ? 0.0 : static_cast<double>(bot_count) / total;

  const double mean_bot_volume =
      positives.empty() ? 0.0 : static_cast<double>(bot_count) / positives.size();
  const std::int64_t threshold = std::max<std::int64_t>(1, round_count(0.5 * mean_bot_volume));
  std::map<std::string, std::int64_t> volume;
  for (const auto& m : c.messages) ++volume[m.account_id];
  std::set<std::string> predicted;
  for (const auto& [account, n] : volume) {
    if (n >= threshold) predicted.insert(account);
  }
  const PrecisionRecall pr = score_predicate(c, predicted);
  const std::string feature_query =
      "SELECT account_id, COUNT(*) AS feature_value FROM messages GROUP BY account_id";
  return json{{"type", "bot_comment_share"},
              {"applied", true},
              {"fraction", p.fraction},
              {"bot_messages", bot_count},
              {"achieved_share", achieved},
              {"canonical_condition",
               {{"feature_query", feature_query},
                {"comparator", ">="},
                {"threshold", threshold},
                {"description", "message volume at or above half the mean bot volume"}}},
              {"precision", pr.precision},
              {"recall", pr.recall}};
}

}  // namespace

json plant_pattern(Campaign& campaign, const std::string& type, const json& params) {
  if (campaign.applied_patterns.count(type)) {
    throw UserError("pattern '" + type + "' has already been planted in this campaign");
  }
  // Per-pattern RNG stream: deterministic regardless of plant call order.
  Rng rng(campaign.spec.seed ^ fnv1a64(type));

  json report;
  if (type == "creation_burst") {
    CreationBurstPattern p;
    if (params.contains("window") && params["window"].is_object()) {
      p.window_start = spec_timestamp(params["window"].value("start", json()), "window.start");
      p.window_end = spec_timestamp(params["window"].value("end", json()), "window.end");
    }
    p.share_positive = params.value("share_positive", 0.97);
    p.coverage = params.value("coverage", 0.9);
    report = creation_burst_report(campaign, p, rng);
  } else if (type == "duplicate_comments") {
    DuplicateCommentsPattern p;
    p.rate = params.value("rate", 0.3);
    p.min_length = params.value("min_length", 12);
    report = duplicate_comments_report(campaign, p, rng);
  } else if (type == "flooding_burst") {
    FloodingBurstPattern p;
    p.hour = params.value("hour", 9);
    p.concentration = params.value("concentration", 0.7);
    report = flooding_burst_report(campaign, p, rng);
  } else if (type == "bot_comment_share") {
    BotCommentSharePattern p;
    p.fraction = params.value("fraction", 0.145);
    report = bot_comment_share_report(campaign, p, rng);
  } else {
    throw UserError("unknown pattern type '" + type + "'");
  }
  campaign.applied_patterns.insert(type);
  campaign.pattern_reports.push_back(report);
  return report;
}

Campaign generate_campaign(const CampaignSpec& spec) {
  Campaign c = generate_base_campaign(spec);
  // Fixed plant order: authorship first, then account fields, then content,
  // then timing, so later patterns see final authorship.
  if (spec.bot_comment_share) {
    plant_pattern(c, "bot_comment_share", json{{"fraction", spec.bot_comment_share->fraction}});
  }
  if (spec.creation_burst) {
    plant_pattern(c, "creation_burst",
                  json{{"window",
                        {{"start", spec.creation_burst->window_start},
                         {"end", spec.creation_burst->window_end}}},
                       {"share_positive", spec.creation_burst->share_positive},
                       {"coverage", spec.creation_burst->coverage}});
  }
  if (spec.duplicate_comments) {
    plant_pattern(c, "duplicate_comments",
                  json{{"rate", spec.duplicate_comments->rate},
                       {"min_length", spec.duplicate_comments->min_length}});
  }
  if (spec.flooding_burst) {
    plant_pattern(c, "flooding_burst",
                  json{{"hour", spec.flooding_burst->hour},
                       {"concentration", spec.flooding_burst->concentration}});
  }
  return c;
}

void write_campaign(const Campaign& campaign, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  const auto path = [&](const char* name) {
    return (std::filesystem::path(out_dir) / name).string();
  };

  std::string accounts_out;
  for (const auto& a : campaign.accounts) {
    json j = {{"account_id", a.account_id}, {"label", label_name(a.label)}};
    if (a.created_at) j["created_at"] = format_timestamp(*a.created_at);
    if (a.display_name) j["display_name"] = *a.display_name;
    if (a.profile_description) j["profile_description"] = *a.profile_description;
    accounts_out += j.dump();
    accounts_out += '\n';
  }
  write_file(path("accounts.jsonl"), accounts_out);

  std::string messages_out;
  for (const auto& m : campaign.messages) {
    json j = {{"message_id", m.message_id},
              {"account_id", m.account_id},
              {"timestamp", format_timestamp(m.timestamp)},
              {"text", m.text},
              {"message_type", message_type_name(m.message_type)}};
    if (m.parent_id) j["parent_id"] = *m.parent_id;
    if (m.channel_id) j["channel_id"] = *m.channel_id;
    if (m.language) j["language"] = *m.language;
    if (m.reaction_count) j["reaction_count"] = *m.reaction_count;
    messages_out += j.dump();
    messages_out += '\n';
  }
  write_file(path("messages.jsonl"), messages_out);

  write_file(path("manifest.json"), campaign.manifest().to_json().dump(2) + "\n");
  write_file(path("ground_truth.json"), campaign.sidecar().dump(2) + "\n");
}

}  // namespace fimikit
