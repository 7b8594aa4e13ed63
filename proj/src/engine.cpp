#include "fimikit/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>

#include "fimikit/common.hpp"
#include "fimikit/verifier.hpp"

namespace fimikit {

using nlohmann::json;

void RunConfig::validate() const {
  if (max_iterations < 2) throw UserError("run config: max_iterations must be at least 2");
  if (!(fail_threshold >= 0.0 && fail_threshold < pass_threshold && pass_threshold <= 10.0)) {
    throw UserError("run config: thresholds must satisfy 0 <= fail < pass <= 10");
  }
  if (!(explore_fraction > 0.0 && explore_fraction <= 1.0)) {
    throw UserError("run config: explore_fraction must lie in (0, 1]");
  }
  if (atomic_cap < 1) throw UserError("run config: atomic_cap must be at least 1");
  if (provider_kind != "scripted" && provider_kind != "remote") {
    throw UserError("run config: provider_kind must be scripted or remote");
  }
  if (dataset.empty()) throw UserError("run config: dataset is required");
  if (top_k < 1) throw UserError("run config: top_k must be at least 1");
}

json RunConfig::to_json() const {
  return json{{"max_iterations", max_iterations},
              {"pass_threshold", pass_threshold},
              {"fail_threshold", fail_threshold},
              {"explore_fraction", explore_fraction},
              {"atomic_cap", atomic_cap},
              {"seed", seed},
              {"provider_kind", provider_kind},
              {"dataset", dataset},
              {"top_k", top_k}};
}

RunConfig RunConfig::from_json(const json& doc) {
  RunConfig c;
  c.max_iterations = doc.value("max_iterations", 15);
  c.pass_threshold = doc.value("pass_threshold", 7.0);
  c.fail_threshold = doc.value("fail_threshold", 4.0);
  c.explore_fraction = doc.value("explore_fraction", 0.5);
  c.atomic_cap = doc.value("atomic_cap", 3);
  c.seed = doc.value("seed", static_cast<std::uint64_t>(0));
  c.provider_kind = doc.value("provider_kind", "scripted");
  c.dataset = doc.value("dataset", "");
  c.top_k = doc.value("top_k", 3);
  return c;
}

const char* mode_name(Mode m) { return m == Mode::explore ? "explore" : "exploit"; }

Mode select_mode(int iteration_index, const RunConfig& config) {
  const int rounds = config.max_iterations - 1;
  const int explore_rounds =
      static_cast<int>(std::ceil(config.explore_fraction * static_cast<double>(rounds)));
  const int round = iteration_index - 1;  // iteration 2 is round 1
  return round <= explore_rounds ? Mode::explore : Mode::exploit;
}

std::vector<Technique> candidate_arms(const Taxonomy& taxonomy,
                                      const std::map<std::string, TechniqueStat>& stats,
                                      Mode mode, int top_k) {
  std::vector<Technique> all;
  for (const auto& [id, t] : taxonomy.techniques()) all.push_back(t);

  if (mode == Mode::explore) {
    std::vector<Technique> untested;
    for (const auto& t : all) {
      if (!stats.count(t.id)) untested.push_back(t);
    }
    return untested.empty() ? all : untested;  // fall back once coverage is total
  }

  // exploit: top-k tested by max signal (desc, id asc) plus their sub-techniques
  std::vector<std::pair<std::string, TechniqueStat>> tested(stats.begin(), stats.end());
  if (tested.empty()) return all;
  std::sort(tested.begin(), tested.end(), [](const auto& a, const auto& b) {
    if (a.second.max_signal != b.second.max_signal) {
      return a.second.max_signal > b.second.max_signal;
    }
    return a.first < b.first;
  });
  std::vector<Technique> out;
  std::set<std::string> seen;
  const int k = std::min<int>(top_k, static_cast<int>(tested.size()));
  for (int i = 0; i < k; ++i) {
    const Technique* t = taxonomy.lookup(tested[i].first);
    if (!t) continue;  // technique ids are validated at persist time
    if (seen.insert(t->id).second) out.push_back(*t);
    for (const auto& child : taxonomy.children(t->id)) {
      if (seen.insert(child.id).second) out.push_back(child);
    }
  }
  return out;
}

Engine::Engine(Store& store, const Taxonomy& taxonomy, Provider& provider, RunConfig config,
               QueryLimits limits, std::string config_hash)
    : store_(store),
      taxonomy_(taxonomy),
      provider_(provider),
      config_(std::move(config)),
      limits_(limits),
      config_hash_(std::move(config_hash)) {
  config_.validate();
}

RunSummary Engine::run() {
  if (taxonomy_.empty()) throw UserError("taxonomy is empty; nothing to investigate");
  if (!store_.has_dataset(config_.dataset)) {
    throw UserError("dataset '" + config_.dataset + "' has not been ingested");
  }
  const std::int64_t run_id =
      store_.create_run(config_.dataset, config_.to_json(), config_hash_, config_.max_iterations);
  store_.scope_queries_to(config_.dataset);

  while (true) {
    auto run = store_.load_run(run_id);
    if (!run || run->status != "running") break;
    if (run->next_iteration > run->max_iterations) break;
    run_iteration(run_id);
    if (stop_after_ != 0 && run->next_iteration >= stop_after_) break;
  }
  return summarize(run_id);
}

RunSummary Engine::resume(std::int64_t run_id) {
  auto existing = store_.load_run(run_id);
  if (!existing) throw UserError("unknown run id: " + std::to_string(run_id));
  if (existing->status == "complete") {
    RunSummary s = summarize(run_id);
    s.notice = "run " + std::to_string(run_id) + " is already complete; nothing to resume";
    return s;
  }
  if (existing->config_hash != config_hash_) {
    throw UserError("run " + std::to_string(run_id) +
                    " was started with a different configuration (config is frozen per run; "
                    "expected hash " + existing->config_hash + ", got " + config_hash_ + ")");
  }
  store_.prepare_resume(run_id);
  store_.scope_queries_to(existing->dataset);

  while (true) {
    auto run = store_.load_run(run_id);
    if (!run || run->status != "running") break;
    if (run->next_iteration > run->max_iterations) break;
    run_iteration(run_id);
    if (stop_after_ != 0 && run->next_iteration >= stop_after_) break;
  }
  return summarize(run_id);
}

IterationRow Engine::run_iteration(std::int64_t run_id) {
  auto run = store_.load_run(run_id);
  if (!run) throw UserError("unknown run id: " + std::to_string(run_id));
  if (run->status != "running") {
    throw UserError("run " + std::to_string(run_id) + " is not running");
  }
  if (run->next_iteration > run->max_iterations) {
    throw UserError("run " + std::to_string(run_id) + " has no iterations left");
  }

  store_.scope_queries_to(run->dataset);
  const auto t0 = std::chrono::steady_clock::now();
  IterationCommit commit;
  commit.row.run_id = run_id;
  commit.row.iteration_index = run->next_iteration;
  commit.row.status = "complete";

  provider_.set_recorder([&commit](const ProviderCallRecord& rec) {
    commit.calls.push_back(rec);
  });

  try {
    if (run->next_iteration == 1) {
      // EDA only: dataset shape, deliberately no anomaly detection, and
      // therefore no finding.
      commit.row.summary = store_.dataset_summary(run->dataset).to_json();
    } else {
      execute_round(*run, commit);
    }
  } catch (const ProviderError& e) {
    commit.row.status = "failed";
    commit.row.error = e.what();
    commit.finding.reset();
    commit.claims.clear();
  } catch (const ValidationError& e) {
    commit.row.status = "failed";
    commit.row.error = e.what();
    commit.finding.reset();
    commit.claims.clear();
  }
  provider_.set_recorder(nullptr);

  commit.row.duration_ms = std::chrono::duration<double, std::milli>(
                               std::chrono::steady_clock::now() - t0)
                               .count();
  store_.commit_iteration(commit);
  return commit.row;
}

void Engine::execute_round(const RunRow& run, IterationCommit& commit) {
  const int iteration = run.next_iteration;

  InvestigationContext context;
  context.run_id = run.run_id;
  context.iteration_index = iteration;
  context.mode = select_mode(iteration, config_);
  commit.row.mode = mode_name(context.mode);
  auto summary = store_.iteration1_summary(run.run_id);
  if (!summary) throw StoreError("iteration 1 summary missing; store is inconsistent");
  context.summary = *summary;
  context.history = store_.history(run.run_id, iteration);

  const auto stats = store_.technique_stats(run.run_id);
  const auto candidates = candidate_arms(taxonomy_, stats, context.mode, config_.top_k);
  if (candidates.empty()) throw ProviderError("no candidate techniques available");

  const TechniqueChoice choice = provider_.select_technique(context, candidates);
  const bool in_candidates = std::any_of(candidates.begin(), candidates.end(),
                                         [&](const Technique& t) { return t.id == choice.technique_id; });
  if (!in_candidates) {
    throw ProviderError("provider chose technique '" + choice.technique_id +
                        "' outside the candidate set (contract violation)");
  }
  commit.row.technique_id = choice.technique_id;
  const Technique* technique = taxonomy_.lookup(choice.technique_id);

  InvestigationPlan plan = provider_.draft_plan(*technique, context);
  // Contract closure: the engine re-validates no matter which backend drafted.
  if (plan.technique_id != technique->id) {
    throw ProviderError("plan is tagged with technique '" + plan.technique_id +
                        "' but the selected technique is '" + technique->id + "'");
  }
  const auto problems = validate_plan(plan, taxonomy_);
  if (!problems.empty()) {
    throw ValidationError("plan failed validation: " + problems.front(), problems);
  }

  Finding finding;
  finding.run_id = run.run_id;
  finding.iteration_index = iteration;
  finding.technique_id = technique->id;
  finding.evidence_type = plan.evidence_type;
  finding.hypothesis = plan.hypothesis;
  finding.metrics = execute_plan(store_, plan, limits_, finding.query_log);
  finding.signal_strength = score_finding(plan.rubric, finding.metrics);
  finding.status = classify_status(finding.signal_strength, plan.pass_threshold,
                                   plan.fail_threshold);
  finding.plan = plan;

  std::vector<AtomicClaimDraft> drafts = provider_.extract_atomic_claims(finding);
  std::vector<std::string> notes;
  if (static_cast<int>(drafts.size()) > config_.atomic_cap) {
    notes.push_back("claims truncated from " + std::to_string(drafts.size()) + " to " +
                    std::to_string(config_.atomic_cap));
    drafts.resize(config_.atomic_cap);
  }

  int ordinal = 0;
  for (const auto& draft : drafts) {
    const CompiledCondition compiled = compile_condition(draft);
    if (!compiled.ok) {
      notes.push_back("claim dropped (" + compiled.error + ")");
      continue;
    }
    AtomicClaim claim;
    claim.run_id = run.run_id;
    claim.iteration_index = iteration;
    claim.ordinal = ++ordinal;
    claim.technique_id = technique->id;
    claim.draft = draft;
    claim.explicit_threshold = compiled.explicit_threshold;
    commit.claims.push_back(std::move(claim));
  }
  if (!drafts.empty() && commit.claims.empty()) {
    notes.push_back("extraction failure: zero compilable claim drafts");
  }
  if (!notes.empty()) {
    std::string joined;
    for (const auto& n : notes) joined += (joined.empty() ? "" : "; ") + n;
    commit.row.error = joined;
  }
  commit.finding = std::move(finding);
}

RunSummary Engine::summarize(std::int64_t run_id) {
  auto run = store_.load_run(run_id);
  if (!run) throw UserError("unknown run id: " + std::to_string(run_id));
  RunSummary s;
  s.run_id = run_id;
  s.completed = run->status == "complete";
  for (const auto& it : store_.iterations_for_run(run_id)) {
    ++s.iterations_executed;
    if (it.status == "failed") ++s.failed_iterations;
  }
  for (const auto& f : store_.findings_for_run(run_id)) {
    switch (f.status) {
      case FindingStatus::PASS: ++s.findings_pass; break;
      case FindingStatus::INCONCLUSIVE: ++s.findings_inconclusive; break;
      case FindingStatus::FAIL: ++s.findings_fail; break;
    }
  }
  s.claims = static_cast<int>(store_.claims_for_run(run_id).size());
  return s;
}

}  // namespace fimikit
