#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "fimikit/plan.hpp"

namespace fimikit {

class Store;
struct QueryLimits;

enum class FindingStatus { PASS, INCONCLUSIVE, FAIL };

const char* finding_status_name(FindingStatus s);

struct QueryLogEntry {
  std::string query;
  std::int64_t row_count = 0;
  double duration_ms = 0.0;
  bool ok = true;
  std::string error;
};

// Metric evaluation outcome. A metric that could not be computed (empty
// result, missing column, failed query) lands in `unavailable` with a
// reason — never a fabricated zero.
struct MetricOutcome {
  std::map<std::string, double> values;
  std::map<std::string, std::string> unavailable;
};

struct Finding {
  std::int64_t finding_id = 0;  // assigned by the store
  std::int64_t run_id = 0;
  int iteration_index = 0;
  std::string technique_id;
  std::string evidence_type;
  std::string hypothesis;
  MetricOutcome metrics;
  double signal_strength = 0.0;  // [0, 10], one decimal
  FindingStatus status = FindingStatus::FAIL;
  std::vector<QueryLogEntry> query_log;
  InvestigationPlan plan;  // persisted alongside for traceability
};

// A decomposed claim as persisted: draft plus linkage and the structural
// criterion-1 outcome decided at compile time.
struct AtomicClaim {
  std::int64_t evidence_id = 0;  // assigned by the store
  std::int64_t finding_id = 0;
  std::int64_t run_id = 0;
  int iteration_index = 0;
  int ordinal = 0;  // 1..atomic_cap within the finding
  std::string technique_id;
  AtomicClaimDraft draft;
  bool explicit_threshold = false;
};

// Runs every plan query through the sandboxed read-only surface and applies
// each metric's extractor to its query result. Query failures mark all
// dependent metrics unavailable; the log records every query either way.
MetricOutcome execute_plan(Store& store, const InvestigationPlan& plan, const QueryLimits& limits,
                           std::vector<QueryLogEntry>& log);

// Sum of points over satisfied rubric checks, rounded half-up to one
// decimal. Checks against unavailable metrics earn nothing.
double score_finding(const ScoringRubric& rubric, const MetricOutcome& metrics);

// PASS iff score >= pass_threshold; FAIL iff score < fail_threshold;
// INCONCLUSIVE between.
FindingStatus classify_status(double score, double pass_threshold, double fail_threshold);

nlohmann::json metric_outcome_to_json(const MetricOutcome& m);
MetricOutcome metric_outcome_from_json(const nlohmann::json& doc);
nlohmann::json query_log_to_json(const std::vector<QueryLogEntry>& log);
std::vector<QueryLogEntry> query_log_from_json(const nlohmann::json& doc);

}  // namespace fimikit
