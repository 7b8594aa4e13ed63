#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "fimikit/dataset.hpp"
#include "fimikit/taxonomy.hpp"

namespace fimikit {

enum class Mode { explore, exploit };
const char* mode_name(Mode m);

enum class Comparator { lt, le, eq, ge, gt };

const char* comparator_symbol(Comparator c);
std::optional<Comparator> parse_comparator(const std::string& symbol);
bool comparator_holds(Comparator c, double value, double threshold);

// How a metric is pulled out of one query's result table.
//   cell(row, col)          value at a row index and named column
//   count_rows              number of result rows (0 is a value, not absent)
//   max/min/mean/stddev     over the numeric values of a named column
//   ratio(a, b)             max(a) / mean(b): peak-to-baseline burst ratio
//   share_above(col, t)     fraction of rows with col strictly above t
enum class ExtractorKind { cell, count_rows, max, min, mean, stddev, ratio, share_above };

struct MetricDefinition {
  std::string name;
  int query_index = 0;
  ExtractorKind kind = ExtractorKind::count_rows;
  int row = 0;             // cell
  std::string column;      // cell, max, min, mean, stddev, ratio (numerator), share_above
  std::string column_b;    // ratio denominator
  double threshold = 0.0;  // share_above
};

struct RubricCheck {
  std::string metric;
  Comparator comparator = Comparator::ge;
  double threshold = 0.0;
  double points = 0.0;  // > 0; all checks sum to 10
};

struct ScoringRubric {
  std::vector<RubricCheck> checks;
  double total_points() const;
};

struct InvestigationPlan {
  std::string technique_id;
  std::string evidence_type;  // short label, e.g. "temporal burst concentration"
  std::string hypothesis;
  std::vector<std::string> analysis_steps;
  std::vector<std::string> queries;  // read-only SQL, executed in order
  std::vector<MetricDefinition> metrics;
  ScoringRubric rubric;
  double pass_threshold = 7.0;
  double fail_threshold = 4.0;
};

// Account-level predicate: feature_query yields (account_id, feature_value)
// rows; the claim predicts positive exactly the labeled accounts whose value
// satisfies `comparator threshold`. The threshold is the mechanized form of
// "inference confidence is explicit" — absent means criterion 1 fails.
struct DetectionCondition {
  std::string feature_query;
  Comparator comparator = Comparator::ge;
  std::optional<double> threshold;
  std::string description;
};

enum class EvidenceCategory { quantitative_metric, temporal_pattern, content_similarity, network_structure };
enum class ClaimStrength { weak, moderate, strong };

const char* evidence_category_name(EvidenceCategory c);
std::optional<EvidenceCategory> parse_evidence_category(const std::string& name);
const char* claim_strength_name(ClaimStrength s);
std::optional<ClaimStrength> parse_claim_strength(const std::string& name);

struct AtomicClaimDraft {
  std::string claim_text;  // one-sentence verifiable statement
  EvidenceCategory category = EvidenceCategory::quantitative_metric;
  ClaimStrength strength = ClaimStrength::weak;
  DetectionCondition condition;
};

// What the provider sees about one prior round.
struct FindingSummary {
  int iteration_index = 0;
  std::string technique_id;
  std::string evidence_type;
  double signal_strength = 0.0;
  std::string status;  // PASS | INCONCLUSIVE | FAIL | ERROR (failed round)
};

struct TechniqueChoice {
  std::string technique_id;
  std::string evidence_type;
  std::string justification;
};

// Everything a provider may see for one round. Rebuilt from the store at the
// start of every iteration — the store is the only cross-iteration memory.
struct InvestigationContext {
  std::int64_t run_id = 0;
  int iteration_index = 2;  // >= 2; iteration 1 is EDA-only
  Mode mode = Mode::explore;
  SummaryStats summary;
  // One entry per prior investigation round, oldest first; failed rounds
  // included with status "ERROR" so the history is never gappy.
  std::vector<FindingSummary> history;
};

// Accounting row for one provider interaction (one HTTP attempt for the
// remote backend, one playbook lookup for the scripted one).
struct ProviderCallRecord {
  std::string provider;  // scripted | remote
  std::string phase;     // select | plan | extract
  std::string status;    // ok | transport_error | schema_error
  double latency_ms = 0.0;
  std::optional<std::int64_t> prompt_tokens;
  std::optional<std::int64_t> completion_tokens;
  std::string request_json;   // credentials never included
  std::string response_json;
};

// ---------------------------------------------------------------------------
// JSON round-trips (wire format for providers, playbooks and the store)
// ---------------------------------------------------------------------------

nlohmann::json plan_to_json(const InvestigationPlan& plan);
// Throws ValidationError. Plans omitting pass/fail thresholds inherit the
// given defaults (the run config's values).
InvestigationPlan plan_from_json(const nlohmann::json& doc, double default_pass = 7.0,
                                 double default_fail = 4.0);

nlohmann::json condition_to_json(const DetectionCondition& c);
DetectionCondition condition_from_json(const nlohmann::json& doc);

nlohmann::json claim_draft_to_json(const AtomicClaimDraft& d);
AtomicClaimDraft claim_draft_from_json(const nlohmann::json& doc);

// Full structural validation of a drafted plan: technique resolves, rubric
// points sum to 10, every check references a defined metric, thresholds
// ordered, every query and metric reference well-formed, every query passes
// the sandbox gate. Returns one message per problem; empty means valid.
std::vector<std::string> validate_plan(const InvestigationPlan& plan, const Taxonomy& taxonomy);

}  // namespace fimikit
