#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "fimikit/remote_provider.hpp"

#include <chrono>
#include <cstdlib>
#include <thread>

#include "fimikit/common.hpp"

namespace fimikit {

using nlohmann::json;

namespace {

struct UrlParts {
  std::string base;  // scheme://host[:port]
  std::string path;
};

UrlParts split_url(const std::string& url) {
  const std::size_t scheme = url.find("://");
  if (scheme == std::string::npos) throw UserError("remote endpoint must be a full URL: " + url);
  const std::size_t path_start = url.find('/', scheme + 3);
  UrlParts p;
  if (path_start == std::string::npos) {
    p.base = url;
    p.path = "/";
  } else {
    p.base = url.substr(0, path_start);
    p.path = url.substr(path_start);
  }
  return p;
}

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

json extract_json_content(const std::string& content) {
  std::string body = content;
  const std::size_t fence = body.find("```");
  if (fence != std::string::npos) {
    std::size_t start = fence + 3;
    if (body.compare(start, 4, "json") == 0) start += 4;
    const std::size_t end = body.find("```", start);
    if (end != std::string::npos) body = body.substr(start, end - start);
  }
  const std::size_t obj = body.find_first_of("{[");
  if (obj == std::string::npos) throw ProviderError("model reply contains no JSON");
  const char open = body[obj];
  const char close = open == '{' ? '}' : ']';
  const std::size_t last = body.rfind(close);
  if (last == std::string::npos || last < obj) throw ProviderError("model reply contains no JSON");
  try {
    return json::parse(body.substr(obj, last - obj + 1));
  } catch (const json::exception& e) {
    throw ProviderError(std::string("model reply is not parseable JSON: ") + e.what());
  }
}

RemoteProvider::RemoteProvider(RemoteOptions options, const Taxonomy* taxonomy)
    : options_(std::move(options)), taxonomy_(taxonomy) {
  if (options_.endpoint.empty()) throw UserError("remote provider: endpoint not configured");
  if (options_.model.empty()) throw UserError("remote provider: model not configured");
  const char* key = std::getenv(options_.api_key_env.c_str());
  if (!key || !*key) {
    throw UserError("remote provider: credential environment variable " + options_.api_key_env +
                    " is not set");
  }
  api_key_ = key;
}

json RemoteProvider::post_chat(const std::string& phase, const json& payload) {
  const UrlParts url = split_url(options_.endpoint);
  const std::string body = payload.dump();

  std::string last_error;
  for (int attempt = 0; attempt < std::max(1, options_.transport_retries); ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(
          std::chrono::milliseconds(options_.backoff_ms * (1 << (attempt - 1))));
    }
    const auto t0 = std::chrono::steady_clock::now();

    httplib::Client client(url.base);
    client.set_connection_timeout(0, options_.request_timeout_ms * 1000);
    client.set_read_timeout(options_.request_timeout_ms / 1000,
                            (options_.request_timeout_ms % 1000) * 1000);
    httplib::Headers headers = {{"Authorization", "Bearer " + api_key_}};
    auto res = client.Post(url.path, headers, body, "application/json");

    ProviderCallRecord rec;
    rec.provider = name();
    rec.phase = phase;
    rec.latency_ms = std::max(0.001, elapsed_ms(t0));
    rec.request_json = body;  // header credential deliberately not included

    if (!res) {
      rec.status = "transport_error";
      rec.response_json = json{{"error", httplib::to_string(res.error())}}.dump();
      record(rec);
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      rec.status = "transport_error";
      rec.response_json = json{{"status", res->status}, {"body", res->body}}.dump();
      record(rec);
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }

    json reply;
    try {
      reply = json::parse(res->body);
    } catch (const json::exception& e) {
      rec.status = "schema_error";
      rec.response_json = res->body;
      record(rec);
      throw ProviderError(std::string("remote reply is not JSON: ") + e.what());
    }
    rec.status = "ok";
    rec.response_json = res->body;
    if (reply.contains("usage")) {
      const auto& u = reply["usage"];
      if (u.contains("prompt_tokens") && u["prompt_tokens"].is_number_integer()) {
        rec.prompt_tokens = u["prompt_tokens"].get<std::int64_t>();
      }
      if (u.contains("completion_tokens") && u["completion_tokens"].is_number_integer()) {
        rec.completion_tokens = u["completion_tokens"].get<std::int64_t>();
      }
    }
    record(rec);
    return reply;
  }
  throw ProviderError("remote call failed after " + std::to_string(options_.transport_retries) +
                      " attempts: " + last_error);
}

json RemoteProvider::call_remote_model(const std::string& phase, const std::string& system_prompt,
                                       const std::string& user_prompt, const Validator& validate) {
  json messages = json::array();
  messages.push_back({{"role", "system"}, {"content", system_prompt}});
  messages.push_back({{"role", "user"}, {"content", user_prompt}});

  for (int round = 0; round <= options_.repair_rounds; ++round) {
    json payload = {{"model", options_.model}, {"messages", messages}};
    const json reply = post_chat(phase, payload);

    std::string content;
    try {
      content = reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception&) {
      throw ProviderError("remote reply has no choices[0].message.content");
    }

    json parsed;
    std::vector<std::string> problems;
    try {
      parsed = extract_json_content(content);
      problems = validate(parsed);
    } catch (const ProviderError& e) {
      problems = {e.what()};
    } catch (const ValidationError& e) {
      problems = e.problems();
    }
    if (problems.empty()) return parsed;

    if (round == options_.repair_rounds) {
      throw ProviderError("response failed validation after " +
                          std::to_string(options_.repair_rounds) +
                          " repair round(s): " + problems.front());
    }
    std::string complaint = "Your previous response failed validation:\n";
    for (const auto& p : problems) complaint += "- " + p + "\n";
    complaint += "Respond again with corrected JSON only, no prose.";
    messages.push_back({{"role", "assistant"}, {"content", content}});
    messages.push_back({{"role", "user"}, {"content", complaint}});
  }
  throw ProviderError("unreachable repair state");
}

namespace {

json summary_json(const SummaryStats& s) { return s.to_json(); }

json history_json(const std::vector<FindingSummary>& history) {
  json arr = json::array();
  for (const auto& h : history) {
    arr.push_back({{"iteration", h.iteration_index},
                   {"technique_id", h.technique_id},
                   {"evidence_type", h.evidence_type},
                   {"signal_strength", h.signal_strength},
                   {"status", h.status}});
  }
  return arr;
}

constexpr const char* kAnalystPreamble =
    "You are an influence-operation analyst working over a relational store with two tables: "
    "accounts(account_id, platform, created_at, created_at_s, display_name, "
    "profile_description, label) and messages(message_id, account_id, timestamp, timestamp_s, "
    "text, message_type, parent_id, channel_id, language, reaction_count, link_count, hashtags, "
    "mentions). timestamp columns are UTC text 'YYYY-MM-DD HH:MM:SS'; *_s columns are epoch "
    "seconds. Only single read-only SELECT (or WITH...SELECT) statements are executable. "
    "Respond with JSON only, no prose, no markdown fences.";

}  // namespace

TechniqueChoice RemoteProvider::select_technique(const InvestigationContext& context,
                                                 const std::vector<Technique>& candidates) {
  json cand = json::array();
  for (const auto& t : candidates) {
    cand.push_back({{"id", t.id}, {"name", t.name}, {"description", t.description}});
  }
  const std::string system =
      std::string(kAnalystPreamble) +
      " Task: choose exactly one technique id from the candidate list. Selection criteria: "
      "(1) new insight potential, (2) pattern match with observed data characteristics, "
      "(3) operationalizability via SQL queries, (4) specificity: sub-techniques preferred over "
      "parent techniques. Reply schema: {\"technique_id\": str, \"evidence_type\": str, "
      "\"justification\": str}.";
  const json user = {{"mode", mode_name(context.mode)},
                     {"iteration", context.iteration_index},
                     {"dataset_summary", summary_json(context.summary)},
                     {"prior_findings", history_json(context.history)},
                     {"candidates", cand}};

  const json parsed = call_remote_model("select", system, user.dump(2), [&](const json& doc) {
    std::vector<std::string> problems;
    if (!doc.is_object()) {
      problems.push_back("reply must be a JSON object");
      return problems;
    }
    const std::string id = doc.value("technique_id", "");
    bool in_candidates = false;
    for (const auto& t : candidates) in_candidates |= t.id == id;
    if (!in_candidates) {
      problems.push_back("technique_id '" + id + "' is not one of the offered candidates");
    }
    if (doc.value("evidence_type", "").empty()) problems.push_back("evidence_type is required");
    if (doc.value("justification", "").empty()) problems.push_back("justification is required");
    return problems;
  });

  TechniqueChoice choice;
  choice.technique_id = parsed.value("technique_id", "");
  choice.evidence_type = parsed.value("evidence_type", "");
  choice.justification = parsed.value("justification", "");
  return choice;
}

InvestigationPlan RemoteProvider::draft_plan(const Technique& technique,
                                             const InvestigationContext& context) {
  const std::string system =
      std::string(kAnalystPreamble) +
      " Task: draft an investigation plan for the given technique. Reply schema: "
      "{\"technique_id\": str, \"evidence_type\": str, \"hypothesis\": str, "
      "\"analysis_steps\": [str], \"queries\": [str], \"metrics\": [{\"name\": str, "
      "\"query_index\": int, \"extractor\": \"cell|count_rows|max|min|mean|stddev|ratio|"
      "share_above\", \"row\": int?, \"column\": str?, \"column_b\": str?, \"threshold\": num?}], "
      "\"rubric\": {\"checks\": [{\"metric\": str, \"comparator\": \"<|<=|=|>=|>\", "
      "\"threshold\": num, \"points\": num}]}, \"pass_threshold\": 7, \"fail_threshold\": 4}. "
      "Rubric points must sum to exactly 10. Every query must be a single read-only SELECT.";
  const json user = {{"technique",
                      {{"id", technique.id},
                       {"name", technique.name},
                       {"description", technique.description}}},
                     {"dataset_summary", summary_json(context.summary)},
                     {"prior_findings", history_json(context.history)}};

  InvestigationPlan plan;
  call_remote_model("plan", system, user.dump(2), [&](const json& doc) -> std::vector<std::string> {
    InvestigationPlan candidate;
    try {
      candidate = plan_from_json(doc);
    } catch (const ValidationError& e) {
      return e.problems();
    }
    if (candidate.technique_id != technique.id) {
      return {"technique_id must be " + technique.id};
    }
    auto problems = validate_plan(candidate, *taxonomy_);
    if (problems.empty()) plan = std::move(candidate);
    return problems;
  });
  return plan;
}

std::vector<AtomicClaimDraft> RemoteProvider::extract_atomic_claims(const Finding& finding) {
  const std::string system =
      std::string(kAnalystPreamble) +
      " Task: decompose the finding into 1 to 3 atomic, independently verifiable claims. Each "
      "claim carries a detection condition: a feature query returning one (account_id, "
      "feature_value) row per account over the accounts/messages tables, plus a comparator and "
      "an explicit numeric threshold selecting predicted-positive accounts. Reply schema: "
      "{\"claims\": [{\"claim_text\": str, \"evidence_type\": \"quantitative_metric|"
      "temporal_pattern|content_similarity|network_structure\", \"strength\": "
      "\"weak|moderate|strong\", \"condition\": {\"feature_query\": str, \"comparator\": "
      "\"<|<=|>=|>\", \"threshold\": num, \"description\": str}}]}.";
  const json user = {{"technique_id", finding.technique_id},
                     {"evidence_type", finding.evidence_type},
                     {"hypothesis", finding.hypothesis},
                     {"metrics", metric_outcome_to_json(finding.metrics)},
                     {"signal_strength", finding.signal_strength},
                     {"status", finding_status_name(finding.status)}};

  std::vector<AtomicClaimDraft> drafts;
  call_remote_model("extract", system, user.dump(2), [&](const json& doc) -> std::vector<std::string> {
    const json* arr = nullptr;
    if (doc.is_array()) {
      arr = &doc;
    } else if (doc.is_object() && doc.contains("claims") && doc["claims"].is_array()) {
      arr = &doc["claims"];
    } else {
      return {"reply must be {\"claims\": [...]} or a bare array"};
    }
    if (arr->empty()) return {"at least one claim is required"};
    std::vector<AtomicClaimDraft> parsed;
    for (const auto& c : *arr) {
      try {
        parsed.push_back(claim_draft_from_json(c));
      } catch (const ValidationError& e) {
        return e.problems();
      }
    }
    drafts = std::move(parsed);
    return {};
  });
  return drafts;
}

}  // namespace fimikit
