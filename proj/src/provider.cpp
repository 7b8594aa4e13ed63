#include "fimikit/provider.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <set>
#include <tuple>

#include "fimikit/common.hpp"

namespace fimikit {

using nlohmann::json;

Playbook Playbook::load_file(const std::string& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw UserError("playbook " + path + " is not valid JSON: " + e.what());
  }
  return from_json(doc);
}

Playbook Playbook::from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("techniques") || !doc["techniques"].is_object()) {
    throw UserError("playbook must be an object with a 'techniques' map");
  }
  Playbook pb;
  for (const auto& [key, value] : doc["techniques"].items()) {
    if (!value.is_object()) throw UserError("playbook entry '" + key + "' must be an object");
    PlaybookEntry entry;
    entry.evidence_type = value.value("evidence_type", "");
    entry.justification = value.value("justification", "");
    if (!value.contains("plan") || !value["plan"].is_object()) {
      throw UserError("playbook entry '" + key + "' has no plan");
    }
    entry.plan = value["plan"];
    if (value.contains("claims") && value["claims"].is_array()) {
      for (const auto& c : value["claims"]) entry.claims.push_back(c);
    }
    pb.entries.emplace(key, std::move(entry));
  }
  return pb;
}

const PlaybookEntry* Playbook::entry_for(const std::string& technique_id) const {
  auto it = entries.find(technique_id);
  if (it != entries.end()) return &it->second;
  it = entries.find("*");
  return it == entries.end() ? nullptr : &it->second;
}

bool Playbook::has_specific_entry(const std::string& technique_id) const {
  return entries.count(technique_id) > 0;
}

ScriptedProvider::ScriptedProvider(Playbook playbook, double default_pass, double default_fail)
    : playbook_(std::move(playbook)), default_pass_(default_pass), default_fail_(default_fail) {}

namespace {

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

TechniqueChoice ScriptedProvider::select_technique(const InvestigationContext& context,
                                                   const std::vector<Technique>& candidates) {
  const auto t0 = std::chrono::steady_clock::now();
  if (candidates.empty()) throw ProviderError("no candidate techniques supplied");

  std::vector<const Technique*> pool;
  for (const auto& t : candidates) {
    if (playbook_.has_specific_entry(t.id)) pool.push_back(&t);
  }
  if (pool.empty()) {
    for (const auto& t : candidates) pool.push_back(&t);
  }

  std::set<std::string> tested;
  for (const auto& h : context.history) {
    if (!h.technique_id.empty()) tested.insert(h.technique_id);
  }

  const Technique* chosen = nullptr;
  std::string why;
  if (context.mode == Mode::explore) {
    // lowest untested id; candidates are untested by construction in explore
    chosen = *std::min_element(pool.begin(), pool.end(),
                               [](const Technique* a, const Technique* b) { return a->id < b->id; });
    why = "untested technique with the lowest id: maximizes taxonomy coverage "
          "(new insight potential) and is operationalizable via playbook SQL";
  } else {
    // specificity first: untested sub-techniques of promising parents
    auto rank = [&](const Technique* t) {
      const int untested = tested.count(t->id) ? 1 : 0;
      const int parent = t->is_sub_technique() ? 0 : 1;
      return std::tuple<int, int, std::string>(untested, parent, t->id);
    };
    chosen = *std::min_element(pool.begin(), pool.end(), [&](const Technique* a, const Technique* b) {
      return rank(a) < rank(b);
    });
    why = chosen->is_sub_technique()
              ? "sub-technique of a high-signal parent: specificity preferred over parent techniques"
              : "deep-dive into a technique with promising prior signal";
  }

  TechniqueChoice choice;
  choice.technique_id = chosen->id;
  const PlaybookEntry* entry = playbook_.entry_for(chosen->id);
  choice.evidence_type = entry && !entry->evidence_type.empty()
                             ? entry->evidence_type
                             : "behavioral pattern analysis";
  choice.justification = entry && !entry->justification.empty() ? entry->justification : why;

  ProviderCallRecord rec;
  rec.provider = name();
  rec.phase = "select";
  rec.status = "ok";
  rec.latency_ms = std::max(0.001, elapsed_ms(t0));
  rec.request_json = json{{"mode", mode_name(context.mode)},
                          {"iteration", context.iteration_index},
                          {"candidates", [&] {
                             json arr = json::array();
                             for (const auto& t : candidates) arr.push_back(t.id);
                             return arr;
                           }()}}
                         .dump();
  rec.response_json = json{{"technique_id", choice.technique_id},
                           {"evidence_type", choice.evidence_type}}
                          .dump();
  record(rec);
  return choice;
}

InvestigationPlan ScriptedProvider::draft_plan(const Technique& technique,
                                               const InvestigationContext& context) {
  (void)context;
  const auto t0 = std::chrono::steady_clock::now();
  const PlaybookEntry* entry = playbook_.entry_for(technique.id);
  if (!entry) {
    throw ProviderError("playbook has no entry (or fallback) for technique " + technique.id);
  }
  json doc = entry->plan;
  doc["technique_id"] = technique.id;
  InvestigationPlan plan;
  try {
    plan = plan_from_json(doc, default_pass_, default_fail_);
  } catch (const ValidationError& e) {
    throw ProviderError("playbook plan for " + technique.id + " is invalid: " + e.what());
  }

  ProviderCallRecord rec;
  rec.provider = name();
  rec.phase = "plan";
  rec.status = "ok";
  rec.latency_ms = std::max(0.001, elapsed_ms(t0));
  rec.request_json = json{{"technique_id", technique.id}}.dump();
  rec.response_json = json{{"evidence_type", plan.evidence_type},
                           {"queries", plan.queries.size()}}
                          .dump();
  record(rec);
  return plan;
}

std::optional<json> instantiate_claim_template(const json& tpl, const MetricOutcome& metrics) {
  bool missing = false;
  std::function<json(const json&)> walk = [&](const json& node) -> json {
    if (node.is_object()) {
      json out = json::object();
      for (const auto& [k, v] : node.items()) out[k] = walk(v);
      return out;
    }
    if (node.is_array()) {
      json out = json::array();
      for (const auto& v : node) out.push_back(walk(v));
      return out;
    }
    if (node.is_string()) {
      std::string s = node.get<std::string>();
      std::size_t pos = 0;
      while ((pos = s.find("{{metric:", pos)) != std::string::npos) {
        const std::size_t end = s.find("}}", pos);
        if (end == std::string::npos) break;
        const std::string name = s.substr(pos + 9, end - pos - 9);
        auto it = metrics.values.find(name);
        if (it == metrics.values.end()) {
          missing = true;
          return node;
        }
        s = s.substr(0, pos) + format_number(it->second) + s.substr(end + 2);
      }
      return json(s);
    }
    return node;
  };
  json out = walk(tpl);
  if (missing) return std::nullopt;
  // A threshold written as a placeholder string becomes a number once resolved.
  if (out.contains("condition") && out["condition"].is_object()) {
    json& thr = out["condition"]["threshold"];
    if (thr.is_string()) {
      char* endp = nullptr;
      const std::string s = thr.get<std::string>();
      const double v = std::strtod(s.c_str(), &endp);
      if (endp == s.c_str() + s.size() && !s.empty()) thr = v;
    }
  }
  return out;
}

std::vector<AtomicClaimDraft> ScriptedProvider::extract_atomic_claims(const Finding& finding) {
  const auto t0 = std::chrono::steady_clock::now();
  const PlaybookEntry* entry = playbook_.entry_for(finding.technique_id);
  if (!entry) {
    throw ProviderError("playbook has no entry (or fallback) for technique " +
                        finding.technique_id);
  }
  std::vector<AtomicClaimDraft> drafts;
  for (const auto& tpl : entry->claims) {
    auto resolved = instantiate_claim_template(tpl, finding.metrics);
    if (!resolved) continue;  // referenced metric unavailable this round
    try {
      drafts.push_back(claim_draft_from_json(*resolved));
    } catch (const ValidationError&) {
      continue;  // malformed template entry; skip rather than abort the round
    }
  }

  ProviderCallRecord rec;
  rec.provider = name();
  rec.phase = "extract";
  rec.status = "ok";
  rec.latency_ms = std::max(0.001, elapsed_ms(t0));
  rec.request_json = json{{"technique_id", finding.technique_id},
                          {"finding_status", finding_status_name(finding.status)}}
                         .dump();
  rec.response_json = json{{"drafts", drafts.size()}}.dump();
  record(rec);
  return drafts;
}

}  // namespace fimikit
