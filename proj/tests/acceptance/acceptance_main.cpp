// Acceptance suite: every criterion prints exactly one PASS/FAIL line.
// Exit code is the number of failed criteria.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fimikit/common.hpp"
#include "fimikit/config.hpp"
#include "fimikit/engine.hpp"
#include "fimikit/evidence.hpp"
#include "fimikit/provider.hpp"
#include "fimikit/report.hpp"
#include "fimikit/stats.hpp"
#include "fimikit/store.hpp"
#include "fimikit/synth.hpp"
#include "fimikit/taxonomy.hpp"
#include "fimikit/verifier.hpp"
#include "../oracle.hpp"

using namespace fimikit;
using nlohmann::json;

namespace {

int failures = 0;

void report_criterion(int number, const std::string& name, bool ok, const std::string& detail) {
  std::printf("%s  criterion %d: %s%s%s\n", ok ? "PASS" : "FAIL", number, name.c_str(),
              detail.empty() ? "" : " -- ", detail.c_str());
  if (!ok) ++failures;
}

struct Scratch {
  std::filesystem::path root;
  Scratch() {
    std::mt19937_64 rng{std::random_device{}()};
    root = std::filesystem::temp_directory_path() / ("fimikit_acc_" + std::to_string(rng()));
    std::filesystem::create_directories(root);
  }
  ~Scratch() {
    std::error_code ec;
    std::filesystem::remove_all(root, ec);
  }
  std::string file(const std::string& name) const { return (root / name).string(); }
};

int run_cli(const std::string& args) {
  const std::string cmd = std::string(FIMIKIT_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Taxonomy shipped_taxonomy() {
  return Taxonomy::load_file(std::string(FIMIKIT_DATA_DIR) + "/taxonomy.json");
}
Playbook shipped_playbook() {
  return Playbook::load_file(std::string(FIMIKIT_DATA_DIR) + "/playbook.json");
}

CampaignSpec acceptance_spec(bool planted, std::uint64_t seed = 42) {
  CampaignSpec spec;
  spec.name = planted ? "burst_campaign" : "null_campaign";
  spec.seed = seed;
  spec.platform = Platform::microblog;
  spec.positive_accounts = 120;
  spec.negative_accounts = 400;
  spec.total_messages = 12000;
  spec.time_start = *parse_timestamp("2025-06-01 00:00:00");
  spec.time_end = *parse_timestamp("2025-08-30 00:00:00");
  if (planted) {
    CreationBurstPattern burst;
    burst.window_start = *parse_timestamp("2025-06-10 00:00:00");
    burst.window_end = *parse_timestamp("2025-06-11 00:00:00");
    burst.share_positive = 0.97;
    burst.coverage = 0.9;
    spec.creation_burst = burst;
    DuplicateCommentsPattern dup;
    dup.rate = 0.3;
    dup.min_length = 12;
    spec.duplicate_comments = dup;
  }
  return spec;
}

void ingest_campaign(Store& store, const Scratch& dir, const Campaign& campaign,
                     const std::string& subdir) {
  write_campaign(campaign, (dir.root / subdir).string());
  store.ingest_dataset(campaign.manifest(), (dir.root / subdir / "accounts.jsonl").string(),
                       (dir.root / subdir / "messages.jsonl").string());
}

RunConfig default_config(const std::string& dataset, std::uint64_t seed = 42) {
  RunConfig cfg;
  cfg.dataset = dataset;
  cfg.seed = seed;
  return cfg;
}

// findings + atomic_evidence with wall-clock durations normalized to zero
json canonical_tables(Store& store, std::int64_t run_id) {
  json findings = json::array();
  for (const auto& f : store.findings_for_run(run_id)) {
    auto log = query_log_to_json(f.query_log);
    for (auto& entry : log) entry["duration_ms"] = 0.0;
    findings.push_back({{"finding_id", f.finding_id},
                        {"iteration_index", f.iteration_index},
                        {"technique_id", f.technique_id},
                        {"evidence_type", f.evidence_type},
                        {"hypothesis", f.hypothesis},
                        {"metrics", metric_outcome_to_json(f.metrics)},
                        {"signal_strength", f.signal_strength},
                        {"status", finding_status_name(f.status)},
                        {"query_log", log},
                        {"plan", plan_to_json(f.plan)}});
  }
  json claims = json::array();
  for (const auto& c : store.claims_for_run(run_id)) {
    claims.push_back({{"evidence_id", c.evidence_id},
                      {"finding_id", c.finding_id},
                      {"iteration_index", c.iteration_index},
                      {"ordinal", c.ordinal},
                      {"technique_id", c.technique_id},
                      {"claim", claim_draft_to_json(c.draft)},
                      {"explicit_threshold", c.explicit_threshold}});
  }
  return json{{"findings", findings}, {"atomic_evidence", claims}};
}

// --------------------------------------------------------------------------

void criterion_1_fisher_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  std::int64_t tables = 0;
  double worst = 0.0;
  bool ok = true;
  std::string detail;
  for (std::int64_t n = 1; n <= 40 && ok; ++n) {
    for (std::int64_t tp = 0; tp <= n && ok; ++tp) {
      for (std::int64_t fp = 0; tp + fp <= n && ok; ++fp) {
        for (std::int64_t fn = 0; tp + fp + fn <= n && ok; ++fn) {
          const std::int64_t tn = n - tp - fp - fn;
          const ConfusionMatrix m{tp, fp, fn, tn};
          const double got = fisher_exact_two_sided(m);
          const double want = static_cast<double>(oracle::fisher_two_sided(tp, fp, fn, tn));
          const double diff = std::abs(got - want);
          worst = std::max(worst, diff);
          if (diff > 1e-12) {
            ok = false;
            detail = "mismatch at (" + std::to_string(tp) + "," + std::to_string(fp) + "," +
                     std::to_string(fn) + "," + std::to_string(tn) + ")";
          }
          ++tables;
        }
      }
    }
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (ok && tables < 10000) {
    ok = false;
    detail = "grid too small";
  }
  if (ok && secs >= 60.0) {
    ok = false;
    detail = "too slow";
  }
  if (ok) {
    std::ostringstream d;
    d << tables << " tables exhaustive over N<=40, max |dp|=" << worst << ", "
      << std::round(secs * 1000.0) << " ms";
    detail = d.str();
  }
  report_criterion(1, "Fisher oracle equivalence (tol 1e-12, < 60 s)", ok, detail);
}

void criterion_2_spot_values() {
  bool ok = true;
  std::string detail;
  const auto or1 = odds_ratio({1, 1, 1, 1});
  if (or1.value != 1.0 || or1.corrected) { ok = false; detail = "(1,1,1,1) OR"; }
  if (fisher_exact_two_sided({1, 1, 1, 1}) != 1.0) { ok = false; detail = "(1,1,1,1) p"; }
  if (std::abs(fisher_exact_two_sided({3, 1, 1, 3}) - 34.0 / 70.0) > 1e-12) {
    ok = false;
    detail = "(3,1,1,3) p != 34/70";
  }
  const auto or2 = odds_ratio({8, 2, 1, 9});
  if (or2.value != 36.0 || or2.corrected) { ok = false; detail = "(8,2,1,9) OR != 36"; }
  const auto or3 = odds_ratio({5, 0, 5, 10});
  if (or3.value != 21.0 || !or3.corrected) { ok = false; detail = "(5,0,5,10) corrected OR != 21"; }
  report_criterion(2, "statistics spot values", ok, detail);
}

void criterion_3_verdict_boundaries() {
  const ConfusionMatrix m{8, 2, 1, 9};
  bool ok = true;
  std::string detail;
  if (verdict(1, 1, true, m, {2.9, false}, 0.001).status != VerdictStatus::FAIL) {
    ok = false;
    detail = "OR 2.9 must FAIL";
  }
  if (verdict(1, 1, true, m, {3.0, false}, 0.049).status != VerdictStatus::PASS) {
    ok = false;
    detail = "OR 3.0 / p 0.049 must PASS";
  }
  if (verdict(1, 1, true, m, {50.0, false}, 0.05).status != VerdictStatus::FAIL) {
    ok = false;
    detail = "p = 0.05 must FAIL (strict)";
  }
  report_criterion(3, "verdict boundaries (OR >= 3.0, p < 0.05 exact)", ok, detail);
}

void criterion_4_score_boundaries() {
  const bool ok = classify_status(7.0, 7.0, 4.0) == FindingStatus::PASS &&
                  classify_status(6.9, 7.0, 4.0) == FindingStatus::INCONCLUSIVE &&
                  classify_status(4.0, 7.0, 4.0) == FindingStatus::INCONCLUSIVE &&
                  classify_status(3.9, 7.0, 4.0) == FindingStatus::FAIL;
  report_criterion(4, "score/status boundaries 7.0/6.9/4.0/3.9", ok, "");
}

std::int64_t fabricate_run(Store& store, const std::string& dataset,
                           const std::vector<int>& pass_per_round) {
  const int rounds = static_cast<int>(pass_per_round.size());
  const std::int64_t run_id =
      store.create_run(dataset, json{{"fixture", true}}, "fixture", rounds + 1);
  IterationCommit eda;
  eda.row.run_id = run_id;
  eda.row.iteration_index = 1;
  eda.row.status = "complete";
  eda.row.summary = json::object();
  store.commit_iteration(eda);

  InvestigationPlan plan;
  plan.technique_id = "T0049";
  plan.evidence_type = "fixture";
  plan.queries = {"SELECT 1 AS one"};
  plan.rubric.checks = {{"one", Comparator::ge, 0.0, 10.0}};

  std::vector<VerificationResult> verdicts;
  for (int r = 0; r < rounds; ++r) {
    IterationCommit commit;
    commit.row.run_id = run_id;
    commit.row.iteration_index = r + 2;
    commit.row.status = "complete";
    commit.row.mode = "explore";
    commit.row.technique_id = "T0049";
    Finding f;
    f.run_id = run_id;
    f.iteration_index = r + 2;
    f.technique_id = "T0049";
    f.evidence_type = "fixture";
    f.hypothesis = "fixture";
    f.signal_strength = 5.0;
    f.status = FindingStatus::INCONCLUSIVE;
    f.plan = plan;
    commit.finding = f;
    for (int c = 0; c < 3; ++c) {
      AtomicClaim claim;
      claim.run_id = run_id;
      claim.iteration_index = r + 2;
      claim.ordinal = c + 1;
      claim.technique_id = "T0049";
      claim.draft.claim_text = "fixture";
      claim.draft.condition.feature_query = "SELECT account_id, 1 AS feature_value FROM accounts";
      claim.draft.condition.comparator = Comparator::ge;
      claim.draft.condition.threshold = 1.0;
      claim.explicit_threshold = true;
      commit.claims.push_back(claim);
    }
    store.commit_iteration(commit);
    const auto claims = store.claims_for_run(run_id);
    int passes_left = pass_per_round[r];
    for (const auto& claim : claims) {
      if (claim.iteration_index != r + 2) continue;
      VerificationResult v;
      v.evidence_id = claim.evidence_id;
      v.run_id = run_id;
      v.criterion_explicit_threshold = true;
      const bool pass = passes_left-- > 0;
      v.matrix = ConfusionMatrix{8, 2, 1, 9};
      v.odds = pass ? 36.0 : 1.2;
      v.p_value = pass ? 0.003 : 0.8;
      v.criterion_effect_size = pass;
      v.criterion_significance = pass;
      v.status = pass ? VerdictStatus::PASS : VerdictStatus::FAIL;
      verdicts.push_back(v);
    }
  }
  for (const auto& v : verdicts) store.insert_verification(v);
  return run_id;
}

void criterion_5_published_aggregates() {
  Scratch dir;
  Store store(dir.file("store.db"));
  const std::int64_t russia =
      fabricate_run(store, "russia_telegram", {2, 2, 2, 2, 2, 2, 2, 1, 1, 0, 0, 0, 0, 0});
  const std::int64_t china =
      fabricate_run(store, "china_x", {2, 2, 2, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0});

  const auto atomic = atomic_pass_rate(store, {russia, china});
  const auto technique = technique_pass_rate(store, {russia, china});
  bool ok = atomic.rows.size() == 2 && technique.rows.size() == 2;
  std::string detail;
  auto expect = [&](double got, double want, const char* what) {
    if (got != want) {
      ok = false;
      detail += std::string(what) + " got " + format_number(got) + " want " +
                format_number(want) + "; ";
    }
  };
  if (ok) {
    expect(atomic.rows[1].pass_rate, 38.1, "atomic russia");
    expect(atomic.rows[0].pass_rate, 19.0, "atomic china");
    expect(atomic.combined.pass_rate, 28.6, "atomic combined");
    expect(technique.rows[1].pass_rate, 64.3, "technique russia");
    expect(technique.rows[0].pass_rate, 35.7, "technique china");
    expect(technique.combined.pass_rate, 50.0, "technique combined");
  }
  report_criterion(5, "published aggregates 38.1/19.0/28.6 and 64.3/35.7/50.0 bit-for-bit", ok,
                   detail);
}

void criterion_6_structural_caps(Store& store, std::int64_t run_id, const Taxonomy& taxonomy) {
  bool ok = true;
  std::string detail;
  const auto iterations = store.iterations_for_run(run_id);
  if (iterations.size() != 15) {
    ok = false;
    detail = "expected 15 iterations, got " + std::to_string(iterations.size());
  }
  const auto findings = store.findings_for_run(run_id);
  for (const auto& f : findings) {
    if (f.iteration_index < 2) {
      ok = false;
      detail = "finding in iteration 1";
    }
    if (!taxonomy.lookup(f.technique_id)) {
      ok = false;
      detail = "unresolvable technique " + f.technique_id;
    }
  }
  const auto claims = store.claims_for_run(run_id);
  if (claims.size() > 42) {
    ok = false;
    detail = "more than 42 claims";
  }
  std::map<int, int> per_round;
  for (const auto& c : claims) {
    if (++per_round[c.iteration_index] > 3) {
      ok = false;
      detail = "more than 3 claims in round " + std::to_string(c.iteration_index);
    }
    if (!taxonomy.lookup(c.technique_id)) {
      ok = false;
      detail = "claim with unresolvable technique";
    }
  }
  if (ok) {
    detail = "15 iterations, " + std::to_string(findings.size()) + " findings, " +
             std::to_string(claims.size()) + " claims";
  }
  report_criterion(6, "structural caps (15 iterations, EDA-only first, <=3/round, <=42 total)", ok,
                   detail);
}

void criteria_6_and_7_end_to_end() {
  const auto t0 = std::chrono::steady_clock::now();
  Scratch dir;
  const Taxonomy taxonomy = shipped_taxonomy();

  // planted campaign
  Store store(dir.file("burst.db"));
  const Campaign planted = generate_campaign(acceptance_spec(true));
  ingest_campaign(store, dir, planted, "burst");
  ScriptedProvider provider(shipped_playbook());
  Engine engine(store, taxonomy, provider, default_config("burst_campaign"), {}, "acc");
  const RunSummary run = engine.run();
  verify_run(store, run.run_id, {});

  criterion_6_structural_caps(store, run.run_id, taxonomy);

  bool ok = true;
  std::string detail;

  // the burst-technique round: findings attributed to T0090
  std::set<int> burst_rounds;
  for (const auto& f : store.findings_for_run(run.run_id)) {
    if (f.technique_id == "T0090") burst_rounds.insert(f.iteration_index);
  }
  if (burst_rounds.empty()) {
    ok = false;
    detail = "no round investigated the creation-burst technique";
  }

  const auto labels = store.labeled_accounts("burst_campaign");
  store.scope_queries_to("burst_campaign");
  bool passing_claim_found = false;
  double passing_precision = 0.0;
  for (const auto& claim : store.claims_for_run(run.run_id)) {
    if (!burst_rounds.count(claim.iteration_index)) continue;
    const auto v = store.verification_for_claim(claim.evidence_id);
    if (!v || v->status != VerdictStatus::PASS) continue;
    if (!v->odds || *v->odds < 3.0 || !v->p_value || *v->p_value >= 0.05) continue;
    // precision of the claim's condition against the generator's labels
    const auto predicted = apply_condition(store, claim.draft.condition, labels, {});
    if (predicted.empty()) continue;
    std::int64_t tp = 0;
    for (const auto& account : predicted) {
      auto it = labels.find(account);
      if (it != labels.end() && it->second == Label::positive) ++tp;
    }
    const double precision = static_cast<double>(tp) / static_cast<double>(predicted.size());
    if (precision >= 0.9) {
      passing_claim_found = true;
      passing_precision = precision;
      break;
    }
  }
  if (ok && !passing_claim_found) {
    ok = false;
    detail = "no PASS claim with precision >= 0.9 in the burst-technique round";
  }

  // null campaign: the same playbook must stay quiet
  Store null_store(dir.file("null.db"));
  const Campaign null_campaign = generate_campaign(acceptance_spec(false));
  ingest_campaign(null_store, dir, null_campaign, "null");
  ScriptedProvider null_provider(shipped_playbook());
  Engine null_engine(null_store, taxonomy, null_provider, default_config("null_campaign"), {},
                     "acc");
  const RunSummary null_run = null_engine.run();
  verify_run(null_store, null_run.run_id, {});
  const auto null_table = technique_pass_rate(null_store, {null_run.run_id});
  std::int64_t null_passes = 0;
  for (const auto& row : null_table.rows) null_passes += row.pass;
  if (ok && null_passes != 0) {
    ok = false;
    detail = "null campaign produced " + std::to_string(null_passes) + " technique-level PASSes";
  }

  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (ok && secs >= 300.0) {
    ok = false;
    detail = "end-to-end run too slow";
  }
  if (ok) {
    std::ostringstream d;
    d << "burst claim precision " << passing_precision << ", null passes 0, "
      << std::round(secs * 10.0) / 10.0 << " s";
    detail = d.str();
  }
  report_criterion(7, "end-to-end planted detection and null-campaign silence", ok, detail);
}

void criterion_8_resume_determinism() {
  Scratch dir;
  const CampaignSpec spec = [] {
    auto s = acceptance_spec(true, 42);
    s.total_messages = 3000;  // keep 29 subprocess runs comfortably fast
    s.positive_accounts = 60;
    s.negative_accounts = 200;
    return s;
  }();
  const Campaign campaign = generate_campaign(spec);
  write_campaign(campaign, (dir.root / "data").string());

  const json config_template = {
      {"taxonomy", std::string(FIMIKIT_DATA_DIR) + "/taxonomy.json"},
      {"dataset", "burst_campaign"},
      {"run", {{"max_iterations", 15}, {"seed", 42}}},
      {"provider",
       {{"kind", "scripted"}, {"playbook", std::string(FIMIKIT_DATA_DIR) + "/playbook.json"}}}};

  auto prepare = [&](const std::string& tag) {
    json config = config_template;
    config["store"] = dir.file("store_" + tag + ".db");
    const std::string path = dir.file("config_" + tag + ".json");
    write_file(path, config.dump());
    Store store(dir.file("store_" + tag + ".db"));
    store.ingest_dataset(campaign.manifest(), (dir.root / "data" / "accounts.jsonl").string(),
                         (dir.root / "data" / "messages.jsonl").string());
    return path;
  };

  bool ok = true;
  std::string detail;

  const std::string base_config = prepare("base");
  if (run_cli("run --config " + base_config) != 0) {
    ok = false;
    detail = "baseline run failed";
  }
  json baseline;
  if (ok) {
    Store store(dir.file("store_base.db"));
    baseline = canonical_tables(store, 1);
  }

  for (int k = 1; k <= 14 && ok; ++k) {
    const std::string tag = "k" + std::to_string(k);
    const std::string config = prepare(tag);
    if (run_cli("run --config " + config + " --stop-after " + std::to_string(k)) != 0) {
      ok = false;
      detail = "interrupted run failed at k=" + std::to_string(k);
      break;
    }
    if (run_cli("resume --config " + config + " --run-id 1") != 0) {
      ok = false;
      detail = "resume failed at k=" + std::to_string(k);
      break;
    }
    Store store(dir.file("store_" + tag + ".db"));
    const json resumed = canonical_tables(store, 1);
    if (resumed.dump() != baseline.dump()) {
      ok = false;
      detail = "tables diverge for k=" + std::to_string(k);
    }
  }
  if (ok) detail = "all k in 1..14 byte-identical to the uninterrupted run";
  report_criterion(8, "resume determinism across process boundaries", ok, detail);
}

void criterion_9_sandbox_soundness() {
  Scratch dir;
  {
    Store store(dir.file("store.db"));
    const Campaign campaign = [&] {
      auto spec = acceptance_spec(false, 7);
      spec.total_messages = 500;
      spec.positive_accounts = 10;
      spec.negative_accounts = 30;
      return generate_campaign(spec);
    }();
    ingest_campaign(store, dir, campaign, "data");
  }
  const std::string before = read_file(dir.file("store.db"));

  const std::vector<std::string> adversarial = {
      "DELETE FROM messages",
      "DELETE FROM messages WHERE 1=1",
      "INSERT INTO messages(dataset, message_id) VALUES ('x', 'y')",
      "UPDATE accounts SET label = 'positive'",
      "UPDATE messages SET text = ''",
      "DROP TABLE messages",
      "DROP TABLE IF EXISTS accounts",
      "CREATE TABLE exfil(x)",
      "CREATE INDEX idx ON messages(text)",
      "ALTER TABLE messages ADD COLUMN hacked INT",
      "REPLACE INTO accounts(dataset, account_id) VALUES('a','b')",
      "PRAGMA journal_mode = DELETE",
      "PRAGMA writable_schema = ON",
      "ATTACH DATABASE '/tmp/evil.db' AS evil",
      "DETACH DATABASE main",
      "VACUUM",
      "REINDEX",
      "ANALYZE",
      "BEGIN; DELETE FROM messages; COMMIT",
      "SELECT 1; DROP TABLE messages",
      "SELECT 1; ATTACH DATABASE '/tmp/e.db' AS e",
      "SELECT load_extension('/tmp/evil.so')",
      "SELECT writefile('/tmp/x', 'data')",
      "INSERT INTO accounts SELECT * FROM accounts",
      "WITH w AS (SELECT 1) DELETE FROM messages",
      "SAVEPOINT sp1",
  };

  bool ok = adversarial.size() >= 20;
  std::string detail = ok ? "" : "corpus too small";
  int rejected = 0;
  {
    Store store(dir.file("store.db"));
    store.scope_queries_to("null_campaign");
    for (const auto& sql : adversarial) {
      try {
        store.run_readonly_query(sql, {});
        ok = false;
        detail = "accepted: " + sql;
      } catch (const Error&) {
        ++rejected;
      }
    }
  }
  const std::string after = read_file(dir.file("store.db"));
  if (ok && after != before) {
    ok = false;
    detail = "store bytes changed";
  }
  if (ok) {
    detail = std::to_string(rejected) + " adversarial queries rejected, store byte-identical";
  }
  report_criterion(9, "sandbox soundness over the adversarial corpus", ok, detail);
}

}  // namespace

int main() {
  std::printf("fimikit acceptance suite\n");
  criterion_1_fisher_oracle();
  criterion_2_spot_values();
  criterion_3_verdict_boundaries();
  criterion_4_score_boundaries();
  criterion_5_published_aggregates();
  criteria_6_and_7_end_to_end();
  criterion_8_resume_determinism();
  criterion_9_sandbox_soundness();
  std::printf("%s (%d criterion failure%s)\n", failures == 0 ? "ALL CRITERIA PASS" : "FAILURES",
              failures, failures == 1 ? "" : "s");
  return failures;
}
