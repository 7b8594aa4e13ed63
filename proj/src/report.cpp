#include "fimikit/report.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "fimikit/common.hpp"

namespace fimikit {

using nlohmann::json;

double pass_rate_percent(std::int64_t pass, std::int64_t n) {
  if (n == 0) return 0.0;
  return round_half_up_1(100.0 * static_cast<double>(pass) / static_cast<double>(n));
}

namespace {

PassRateTable assemble(std::map<std::string, std::pair<std::int64_t, std::int64_t>>& per_dataset) {
  // value = (pass, n)
  PassRateTable table;
  std::int64_t total_pass = 0, total_n = 0;
  for (const auto& [dataset, counts] : per_dataset) {
    if (counts.second == 0) continue;
    PassRateRow row;
    row.dataset = dataset;
    row.pass = counts.first;
    row.n = counts.second;
    row.fail = row.n - row.pass;
    row.pass_rate = pass_rate_percent(row.pass, row.n);
    table.rows.push_back(row);
    total_pass += row.pass;
    total_n += row.n;
  }
  if (total_n == 0) {
    table.empty = true;
    table.notice = "no verified claims; run `verify` first";
    return table;
  }
  table.empty = false;
  table.combined.dataset = "combined";
  table.combined.pass = total_pass;
  table.combined.n = total_n;
  table.combined.fail = total_n - total_pass;
  table.combined.pass_rate = pass_rate_percent(total_pass, total_n);
  return table;
}

}  // namespace

PassRateTable atomic_pass_rate(Store& store, const std::vector<std::int64_t>& run_ids) {
  std::map<std::string, std::pair<std::int64_t, std::int64_t>> per_dataset;
  for (const auto& run : store.runs_by_ids(run_ids)) {
    auto& [pass, n] = per_dataset[run.dataset];
    for (const auto& v : store.verifications_for_run(run.run_id)) {
      ++n;
      if (v.status == VerdictStatus::PASS) ++pass;
    }
  }
  return assemble(per_dataset);
}

PassRateTable technique_pass_rate(Store& store, const std::vector<std::int64_t>& run_ids) {
  std::map<std::string, std::pair<std::int64_t, std::int64_t>> per_dataset;
  bool any_verifications = false;
  for (const auto& run : store.runs_by_ids(run_ids)) {
    std::set<std::int64_t> passing_evidence;
    for (const auto& v : store.verifications_for_run(run.run_id)) {
      any_verifications = true;
      if (v.status == VerdictStatus::PASS) passing_evidence.insert(v.evidence_id);
    }
    std::set<int> passing_rounds;
    for (const auto& claim : store.claims_for_run(run.run_id)) {
      if (passing_evidence.count(claim.evidence_id)) passing_rounds.insert(claim.iteration_index);
    }
    auto& [pass, n] = per_dataset[run.dataset];
    for (const auto& it : store.iterations_for_run(run.run_id)) {
      if (it.iteration_index < 2) continue;  // EDA is not a round
      ++n;
      if (passing_rounds.count(it.iteration_index)) ++pass;
    }
  }
  auto table = assemble(per_dataset);
  if (!any_verifications) {
    table.rows.clear();
    table.empty = true;
    table.combined = PassRateRow{};
    table.notice = "no verified claims; run `verify` first";
  }
  return table;
}

TraceChain trace(Store& store, const Taxonomy& taxonomy, std::int64_t evidence_id) {
  TraceChain chain;
  auto claim = store.claim_by_id(evidence_id);
  if (!claim) throw UserError("unknown atomic evidence id: " + std::to_string(evidence_id));
  chain.claim = *claim;
  chain.verification = store.verification_for_claim(evidence_id);

  auto finding = store.finding_by_id(claim->finding_id);
  if (!finding) {
    throw StoreError("trace broken: finding " + std::to_string(claim->finding_id) +
                     " is missing for evidence " + std::to_string(evidence_id));
  }
  chain.finding = *finding;
  chain.run_id = finding->run_id;
  chain.iteration_index = finding->iteration_index;
  chain.technique_id = finding->technique_id;
  if (!store.load_run(finding->run_id)) {
    throw StoreError("trace broken: run " + std::to_string(finding->run_id) +
                     " is missing for finding " + std::to_string(finding->finding_id));
  }
  const Technique* technique = taxonomy.lookup(finding->technique_id);
  if (!technique) {
    throw StoreError("trace broken: technique " + finding->technique_id +
                     " is not present in the loaded taxonomy");
  }
  chain.technique_name = technique->name;
  for (const auto& entry : chain.finding.query_log) chain.queries_executed.push_back(entry.query);
  return chain;
}

std::string trace_to_text(const TraceChain& chain) {
  std::ostringstream out;
  out << "atomic evidence " << chain.claim.evidence_id << "\n";
  out << "  claim: " << chain.claim.draft.claim_text << "\n";
  out << "  condition: " << chain.claim.draft.condition.description << " ("
      << comparator_symbol(chain.claim.draft.condition.comparator) << " "
      << (chain.claim.draft.condition.threshold
              ? format_number(*chain.claim.draft.condition.threshold)
              : std::string("<no threshold>"))
      << ")\n";
  if (chain.verification) {
    out << "  verification: " << verdict_status_name(chain.verification->status);
    if (chain.verification->matrix) {
      const auto& m = *chain.verification->matrix;
      out << "  tp=" << m.tp << " fp=" << m.fp << " fn=" << m.fn << " tn=" << m.tn;
    }
    if (chain.verification->odds) out << "  OR=" << format_number(*chain.verification->odds);
    if (chain.verification->p_value) out << "  p=" << format_number(*chain.verification->p_value);
    out << "\n";
  } else {
    out << "  verification: (not yet verified)\n";
  }
  out << "-> finding " << chain.finding.finding_id << " (run " << chain.run_id << ", iteration "
      << chain.iteration_index << ")\n";
  out << "  evidence type: " << chain.finding.evidence_type << "\n";
  out << "  signal strength: " << format_number(chain.finding.signal_strength) << " ("
      << finding_status_name(chain.finding.status) << ")\n";
  out << "-> technique " << chain.technique_id << " \"" << chain.technique_name << "\"\n";
  out << "-> queries executed:\n";
  for (const auto& q : chain.queries_executed) out << "   " << q << "\n";
  return out.str();
}

namespace {

void render_pass_rate_table(std::ostringstream& out, const PassRateTable& table) {
  if (table.empty) {
    out << "_" << table.notice << "_\n\n";
    return;
  }
  out << "| Dataset | N | Pass Rate | PASS | FAIL |\n";
  out << "|---|---:|---:|---:|---:|\n";
  char rate[16];
  for (const auto& row : table.rows) {
    std::snprintf(rate, sizeof(rate), "%.1f%%", row.pass_rate);
    out << "| " << row.dataset << " | " << row.n << " | " << rate << " | " << row.pass << " | "
        << row.fail << " |\n";
  }
  std::snprintf(rate, sizeof(rate), "%.1f%%", table.combined.pass_rate);
  out << "| **combined** | " << table.combined.n << " | " << rate << " | " << table.combined.pass
      << " | " << table.combined.fail << " |\n\n";
}

std::string markdown_report(Store& store, const Taxonomy& taxonomy, const RunRow& run,
                            const CostPricing& pricing) {
  (void)taxonomy;
  std::ostringstream out;
  const auto iterations = store.iterations_for_run(run.run_id);
  const auto findings = store.findings_for_run(run.run_id);
  const auto claims = store.claims_for_run(run.run_id);
  const auto verifications = store.verifications_for_run(run.run_id);
  std::map<std::int64_t, const VerificationResult*> by_evidence;
  for (const auto& v : verifications) by_evidence[v.evidence_id] = &v;

  // 1. summary
  out << "# Investigation Report: run " << run.run_id << "\n\n";
  out << "- dataset: `" << run.dataset << "`\n";
  out << "- status: " << run.status << "\n";
  out << "- iterations executed: " << iterations.size() << " of " << run.max_iterations << "\n";
  out << "- config hash: `" << run.config_hash << "`\n";
  if (auto summary = store.iteration1_summary(run.run_id)) {
    out << "- messages: " << summary->message_count << ", accounts: " << summary->account_count
        << " (" << summary->labeled_positive_count << " positive / "
        << summary->labeled_negative_count << " negative)\n";
  }
  out << "\n";

  // 2. pass-rate tables
  out << "## Pass Rates\n\n";
  out << "### Atomic evidence level\n\n";
  render_pass_rate_table(out, atomic_pass_rate(store, {run.run_id}));
  out << "### Technique detection level\n\n";
  render_pass_rate_table(out, technique_pass_rate(store, {run.run_id}));

  // 3. rounds
  out << "## Investigation Rounds\n\n";
  std::map<int, const Finding*> finding_by_iteration;
  for (const auto& f : findings) finding_by_iteration[f.iteration_index] = &f;
  for (const auto& it : iterations) {
    if (it.iteration_index == 1) {
      out << "### Iteration 1 (EDA)\n\nDataset statistics captured; no anomaly detection by "
             "design.\n\n";
      continue;
    }
    out << "### Iteration " << it.iteration_index << " (" << it.mode << ")\n\n";
    if (it.status == "failed") {
      out << "- status: **failed** (" << it.error << ")\n\n";
      continue;
    }
    auto fit = finding_by_iteration.find(it.iteration_index);
    if (fit == finding_by_iteration.end()) continue;
    const Finding& f = *fit->second;
    out << "- technique: `" << f.technique_id << "` (" << f.evidence_type << ")\n";
    out << "- hypothesis: " << f.hypothesis << "\n";
    char score[16];
    std::snprintf(score, sizeof(score), "%.1f", f.signal_strength);
    out << "- signal strength: " << score << " -> **" << finding_status_name(f.status) << "**\n";
    if (!f.metrics.values.empty()) {
      out << "- metrics:";
      for (const auto& [name, value] : f.metrics.values) {
        out << " " << name << "=" << format_number(value);
      }
      out << "\n";
    }
    if (!f.metrics.unavailable.empty()) {
      out << "- unavailable metrics:";
      for (const auto& [name, reason] : f.metrics.unavailable) {
        out << " " << name << " (" << reason << ");";
      }
      out << "\n";
    }
    if (!it.error.empty()) out << "- notes: " << it.error << "\n";
    out << "\n";
  }

  // 4. verifications
  out << "## Verifications\n\n";
  if (claims.empty()) {
    out << "_no atomic evidence extracted_\n\n";
  }
  for (const auto& claim : claims) {
    out << "### Evidence " << claim.evidence_id << " (iteration " << claim.iteration_index
        << ", `" << claim.technique_id << "`)\n\n";
    out << "- claim: " << claim.draft.claim_text << "\n";
    out << "- type: " << evidence_category_name(claim.draft.category) << ", strength "
        << claim_strength_name(claim.draft.strength) << "\n";
    out << "- condition: " << comparator_symbol(claim.draft.condition.comparator) << " "
        << (claim.draft.condition.threshold ? format_number(*claim.draft.condition.threshold)
                                            : std::string("<no threshold>"))
        << " over `" << claim.draft.condition.feature_query << "`\n";
    auto vit = by_evidence.find(claim.evidence_id);
    if (vit == by_evidence.end()) {
      out << "- verification: _pending_\n\n";
      continue;
    }
    const VerificationResult& v = *vit->second;
    out << "- verdict: **" << verdict_status_name(v.status) << "** (explicit threshold: "
        << (v.criterion_explicit_threshold ? "yes" : "no") << ", effect size: "
        << (v.criterion_effect_size ? "yes" : "no") << ", significance: "
        << (v.criterion_significance ? "yes" : "no") << ")\n";
    if (v.matrix) {
      out << "- confusion: tp=" << v.matrix->tp << " fp=" << v.matrix->fp << " fn=" << v.matrix->fn
          << " tn=" << v.matrix->tn << "\n";
    }
    if (v.odds) {
      out << "- odds ratio: " << format_number(*v.odds) << (v.odds_corrected ? " (corrected)" : "")
          << "\n";
    }
    if (v.p_value) out << "- p-value: " << format_number(*v.p_value) << "\n";
    if (!v.error.empty()) out << "- error: " << v.error << "\n";
    out << "\n";
  }

  // 5. cost
  out << "## Cost\n\n";
  const auto calls = store.provider_calls_for_run(run.run_id);
  std::int64_t prompt_tokens = 0, completion_tokens = 0;
  for (const auto& call : calls) {
    prompt_tokens += call.record.prompt_tokens.value_or(0);
    completion_tokens += call.record.completion_tokens.value_or(0);
  }
  out << "- provider calls: " << calls.size() << "\n";
  out << "- tokens: " << prompt_tokens << " prompt / " << completion_tokens << " completion\n";
  char wall[32];
  std::snprintf(wall, sizeof(wall), "%.1f", run.wall_ms / 1000.0);
  out << "- wall time: " << wall << " s\n";
  const double usd = (static_cast<double>(prompt_tokens) * pricing.prompt_usd_per_1m +
                      static_cast<double>(completion_tokens) * pricing.completion_usd_per_1m) /
                     1e6;
  char usd_s[32];
  std::snprintf(usd_s, sizeof(usd_s), "%.4f", usd);
  out << "- estimated cost: USD " << usd_s << "\n";
  return out.str();
}

json verification_to_json(const VerificationResult& v) {
  json j = {{"evidence_id", v.evidence_id},
            {"run_id", v.run_id},
            {"or_corrected", v.odds_corrected},
            {"criteria",
             {{"explicit_threshold", v.criterion_explicit_threshold},
              {"effect_size_ok", v.criterion_effect_size},
              {"significance_ok", v.criterion_significance}}},
            {"status", verdict_status_name(v.status)},
            {"error", v.error}};
  if (v.matrix) {
    j["matrix"] = {{"tp", v.matrix->tp}, {"fp", v.matrix->fp}, {"fn", v.matrix->fn},
                   {"tn", v.matrix->tn}};
  } else {
    j["matrix"] = nullptr;
  }
  j["odds_ratio"] = v.odds ? json(*v.odds) : json(nullptr);
  j["p_value"] = v.p_value ? json(*v.p_value) : json(nullptr);
  return j;
}

std::string structured_report(Store& store, const RunRow& run, const CostPricing& pricing) {
  json doc;
  doc["run"] = {{"run_id", run.run_id},
                {"dataset", run.dataset},
                {"status", run.status},
                {"next_iteration", run.next_iteration},
                {"max_iterations", run.max_iterations},
                {"config", run.config},
                {"config_hash", run.config_hash},
                {"wall_ms", run.wall_ms}};

  json iterations = json::array();
  for (const auto& it : store.iterations_for_run(run.run_id)) {
    json j = {{"iteration_index", it.iteration_index},
              {"mode", it.mode},
              {"status", it.status},
              {"technique_id", it.technique_id},
              {"error", it.error},
              {"duration_ms", it.duration_ms}};
    j["summary"] = it.summary ? *it.summary : json(nullptr);
    iterations.push_back(std::move(j));
  }
  doc["iterations"] = std::move(iterations);

  json findings = json::array();
  for (const auto& f : store.findings_for_run(run.run_id)) {
    findings.push_back({{"finding_id", f.finding_id},
                        {"run_id", f.run_id},
                        {"iteration_index", f.iteration_index},
                        {"technique_id", f.technique_id},
                        {"evidence_type", f.evidence_type},
                        {"hypothesis", f.hypothesis},
                        {"metrics", metric_outcome_to_json(f.metrics)},
                        {"signal_strength", f.signal_strength},
                        {"status", finding_status_name(f.status)},
                        {"query_log", query_log_to_json(f.query_log)},
                        {"plan", plan_to_json(f.plan)}});
  }
  doc["findings"] = std::move(findings);

  json claims = json::array();
  for (const auto& c : store.claims_for_run(run.run_id)) {
    claims.push_back({{"evidence_id", c.evidence_id},
                      {"finding_id", c.finding_id},
                      {"run_id", c.run_id},
                      {"iteration_index", c.iteration_index},
                      {"ordinal", c.ordinal},
                      {"technique_id", c.technique_id},
                      {"claim", claim_draft_to_json(c.draft)},
                      {"explicit_threshold", c.explicit_threshold}});
  }
  doc["atomic_evidence"] = std::move(claims);

  json verifications = json::array();
  for (const auto& v : store.verifications_for_run(run.run_id)) {
    verifications.push_back(verification_to_json(v));
  }
  doc["verifications"] = std::move(verifications);

  json calls = json::array();
  std::int64_t prompt_tokens = 0, completion_tokens = 0;
  for (const auto& call : store.provider_calls_for_run(run.run_id)) {
    prompt_tokens += call.record.prompt_tokens.value_or(0);
    completion_tokens += call.record.completion_tokens.value_or(0);
    calls.push_back({{"call_id", call.call_id},
                     {"iteration_index", call.iteration_index},
                     {"provider", call.record.provider},
                     {"phase", call.record.phase},
                     {"status", call.record.status},
                     {"latency_ms", call.record.latency_ms},
                     {"prompt_tokens",
                      call.record.prompt_tokens ? json(*call.record.prompt_tokens) : json(nullptr)},
                     {"completion_tokens", call.record.completion_tokens
                                               ? json(*call.record.completion_tokens)
                                               : json(nullptr)}});
  }
  doc["provider_calls"] = std::move(calls);
  doc["cost"] = {{"provider_calls", doc["provider_calls"].size()},
                 {"prompt_tokens", prompt_tokens},
                 {"completion_tokens", completion_tokens},
                 {"wall_ms", run.wall_ms},
                 {"usd", (static_cast<double>(prompt_tokens) * pricing.prompt_usd_per_1m +
                          static_cast<double>(completion_tokens) * pricing.completion_usd_per_1m) /
                             1e6}};
  return doc.dump(2) + "\n";
}

}  // namespace

std::string export_report(Store& store, const Taxonomy& taxonomy, std::int64_t run_id,
                          ReportFormat format, const CostPricing& pricing) {
  auto run = store.load_run(run_id);
  if (!run) throw UserError("unknown run id: " + std::to_string(run_id));
  if (format == ReportFormat::markdown) {
    return markdown_report(store, taxonomy, *run, pricing);
  }
  return structured_report(store, *run, pricing);
}

}  // namespace fimikit
