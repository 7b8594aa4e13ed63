#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include <nlohmann/json.hpp>

#include "fimikit/common.hpp"
#include "fimikit/evidence.hpp"
#include "fimikit/store.hpp"
#include "support.hpp"

using namespace fimikit;
using nlohmann::json;
using testsupport::TempDir;

namespace {

// Plan skeleton for extractor tests: one query, metrics added per case.
InvestigationPlan plan_with(const std::string& query, std::vector<MetricDefinition> metrics) {
  InvestigationPlan p;
  p.technique_id = "T0049";
  p.evidence_type = "test";
  p.hypothesis = "test";
  p.queries = {query};
  p.metrics = std::move(metrics);
  p.rubric.checks = {{"dummy", Comparator::ge, 0.0, 10.0}};
  return p;
}

MetricDefinition metric(const std::string& name, ExtractorKind kind, const std::string& col = "",
                        const std::string& col_b = "", int row = 0, double threshold = 0.0) {
  MetricDefinition m;
  m.name = name;
  m.query_index = 0;
  m.kind = kind;
  m.column = col;
  m.column_b = col_b;
  m.row = row;
  m.threshold = threshold;
  return m;
}

}  // namespace

TEST_CASE("execute_plan: ratio extractor is the peak-to-mean burst ratio") {
  TempDir dir;
  Store store(dir.file("store.db"));
  // hourly counts 1, 1, 4 -> max 4, mean 2, ratio 2
  const std::string q =
      "WITH hours(h, c) AS (VALUES ('07', 1), ('08', 1), ('09', 4)) SELECT h AS hour, c AS count "
      "FROM hours";
  // VALUES inside WITH is allowed by the gate? The gate requires the first
  // token to be WITH; VALUES appears later and is not on the deny list.
  auto plan = plan_with(q, {metric("max_hour_ratio", ExtractorKind::ratio, "count", "count"),
                            metric("hours_seen", ExtractorKind::count_rows)});
  std::vector<QueryLogEntry> log;
  const auto out = execute_plan(store, plan, {}, log);
  REQUIRE(out.values.count("max_hour_ratio"));
  CHECK(out.values.at("max_hour_ratio") == 2.0);
  CHECK(out.values.at("hours_seen") == 3.0);
  REQUIRE(log.size() == 1);
  CHECK(log[0].ok);
  CHECK(log[0].row_count == 3);
}

TEST_CASE("execute_plan: count_rows on an empty result is 0, not unavailable") {
  TempDir dir;
  Store store(dir.file("store.db"));
  auto plan = plan_with("SELECT 1 AS x WHERE 1 = 0", {metric("n", ExtractorKind::count_rows)});
  std::vector<QueryLogEntry> log;
  const auto out = execute_plan(store, plan, {}, log);
  CHECK(out.values.at("n") == 0.0);
  CHECK(out.unavailable.empty());
}

TEST_CASE("execute_plan: cell on an empty result is unavailable, never a fabricated zero") {
  TempDir dir;
  Store store(dir.file("store.db"));
  auto plan =
      plan_with("SELECT 1 AS x WHERE 1 = 0", {metric("v", ExtractorKind::cell, "x", "", 0)});
  std::vector<QueryLogEntry> log;
  const auto out = execute_plan(store, plan, {}, log);
  CHECK(out.values.count("v") == 0);
  REQUIRE(out.unavailable.count("v"));
  CHECK(out.unavailable.at("v").find("out of range") != std::string::npos);
}

TEST_CASE("execute_plan: aggregate extractors and share_above") {
  TempDir dir;
  Store store(dir.file("store.db"));
  const std::string q = "WITH v(x) AS (VALUES (1.0), (2.0), (3.0), (6.0)) SELECT x FROM v";
  auto plan = plan_with(q, {metric("mx", ExtractorKind::max, "x"),
                            metric("mn", ExtractorKind::min, "x"),
                            metric("mean", ExtractorKind::mean, "x"),
                            metric("sd", ExtractorKind::stddev, "x"),
                            metric("share", ExtractorKind::share_above, "x", "", 0, 2.0)});
  std::vector<QueryLogEntry> log;
  const auto out = execute_plan(store, plan, {}, log);
  CHECK(out.values.at("mx") == 6.0);
  CHECK(out.values.at("mn") == 1.0);
  CHECK(out.values.at("mean") == 3.0);
  // population stddev of {1,2,3,6}: sqrt(14/4)
  CHECK(out.values.at("sd") == Catch::Approx(std::sqrt(3.5)).margin(1e-12));
  CHECK(out.values.at("share") == 0.5);  // strictly above 2: {3, 6}
}

TEST_CASE("execute_plan: failed query marks dependent metrics unavailable") {
  TempDir dir;
  Store store(dir.file("store.db"));
  auto plan = plan_with("SELECT definitely_not_a_column FROM nonexistent_table",
                        {metric("v", ExtractorKind::count_rows)});
  std::vector<QueryLogEntry> log;
  const auto out = execute_plan(store, plan, {}, log);
  REQUIRE(log.size() == 1);
  CHECK_FALSE(log[0].ok);
  REQUIRE(out.unavailable.count("v"));
  CHECK(out.unavailable.at("v").find("query failed") != std::string::npos);
}

TEST_CASE("score_finding: full, partial and empty rubrics") {
  ScoringRubric rubric;
  rubric.checks = {{"a", Comparator::ge, 1.0, 4.0},
                   {"b", Comparator::ge, 1.0, 3.0},
                   {"c", Comparator::ge, 1.0, 3.0}};
  MetricOutcome all;
  all.values = {{"a", 2.0}, {"b", 2.0}, {"c", 2.0}};
  CHECK(score_finding(rubric, all) == 10.0);

  MetricOutcome partial;  // a and b satisfied, c not
  partial.values = {{"a", 2.0}, {"b", 2.0}, {"c", 0.0}};
  CHECK(score_finding(rubric, partial) == 7.0);

  MetricOutcome none;  // everything unavailable earns zero
  none.unavailable = {{"a", "gone"}, {"b", "gone"}, {"c", "gone"}};
  CHECK(score_finding(rubric, none) == 0.0);
}

TEST_CASE("score_finding: monotone in satisfied checks") {
  ScoringRubric rubric;
  rubric.checks = {{"a", Comparator::ge, 1.0, 2.5},
                   {"b", Comparator::ge, 1.0, 2.5},
                   {"c", Comparator::ge, 1.0, 5.0}};
  MetricOutcome m;
  m.values = {{"a", 0.0}, {"b", 0.0}, {"c", 0.0}};
  double prev = score_finding(rubric, m);
  for (const char* name : {"a", "b", "c"}) {
    m.values[name] = 1.0;  // flip one more check to satisfied
    const double next = score_finding(rubric, m);
    CHECK(next >= prev);
    prev = next;
  }
  CHECK(prev == 10.0);
}

TEST_CASE("classify_status: exact boundaries") {
  CHECK(classify_status(7.0, 7.0, 4.0) == FindingStatus::PASS);
  CHECK(classify_status(6.9, 7.0, 4.0) == FindingStatus::INCONCLUSIVE);
  CHECK(classify_status(4.0, 7.0, 4.0) == FindingStatus::INCONCLUSIVE);
  CHECK(classify_status(3.9, 7.0, 4.0) == FindingStatus::FAIL);
  CHECK(classify_status(10.0, 7.0, 4.0) == FindingStatus::PASS);
  CHECK(classify_status(0.0, 7.0, 4.0) == FindingStatus::FAIL);
}

TEST_CASE("persist_finding: round-trips, and invariants are enforced") {
  TempDir dir;
  Store store(dir.file("store.db"));
  testsupport::ingest_tiny_dataset(store, dir);
  const std::int64_t run_id = store.create_run("tiny", json::object(), "h", 15);

  auto plan = plan_with("SELECT COUNT(*) AS n FROM messages",
                        {metric("n", ExtractorKind::cell, "n")});
  Finding f;
  f.run_id = run_id;
  f.iteration_index = 2;
  f.technique_id = "T0049";
  f.evidence_type = "test";
  f.hypothesis = "h";
  f.metrics.values = {{"n", 6.0}};
  f.signal_strength = 7.0;
  f.status = FindingStatus::PASS;
  f.plan = plan;

  SECTION("valid finding round-trips identically") {
    const std::int64_t id = store.persist_finding(f);
    auto got = store.finding_by_id(id);
    REQUIRE(got.has_value());
    CHECK(got->technique_id == "T0049");
    CHECK(got->metrics.values.at("n") == 6.0);
    CHECK(got->signal_strength == 7.0);
    CHECK(got->status == FindingStatus::PASS);
    CHECK(got->plan.queries == plan.queries);
  }

  SECTION("undeclared metric is rejected") {
    f.metrics.values["rogue"] = 1.0;
    CHECK_THROWS_AS(store.persist_finding(f), ValidationError);
  }

  SECTION("duplicate (run, iteration) finding is rejected") {
    store.persist_finding(f);
    Finding dup = f;
    dup.finding_id = 0;
    CHECK_THROWS_AS(store.persist_finding(dup), ValidationError);
  }

  SECTION("iteration-1 findings are rejected") {
    f.iteration_index = 1;
    CHECK_THROWS_AS(store.persist_finding(f), ValidationError);
  }
}
