#include "fimikit/plan.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "fimikit/common.hpp"
#include "fimikit/sandbox.hpp"

namespace fimikit {

using nlohmann::json;

const char* comparator_symbol(Comparator c) {
  switch (c) {
    case Comparator::lt: return "<";
    case Comparator::le: return "<=";
    case Comparator::eq: return "=";
    case Comparator::ge: return ">=";
    case Comparator::gt: return ">";
  }
  return "?";
}

std::optional<Comparator> parse_comparator(const std::string& s) {
  if (s == "<") return Comparator::lt;
  if (s == "<=" || s == "≤") return Comparator::le;
  if (s == "=" || s == "==") return Comparator::eq;
  if (s == ">=" || s == "≥") return Comparator::ge;
  if (s == ">") return Comparator::gt;
  return std::nullopt;
}

bool comparator_holds(Comparator c, double value, double threshold) {
  switch (c) {
    case Comparator::lt: return value < threshold;
    case Comparator::le: return value <= threshold;
    case Comparator::eq: return value == threshold;
    case Comparator::ge: return value >= threshold;
    case Comparator::gt: return value > threshold;
  }
  return false;
}

double ScoringRubric::total_points() const {
  double sum = 0.0;
  for (const auto& c : checks) sum += c.points;
  return sum;
}

const char* evidence_category_name(EvidenceCategory c) {
  switch (c) {
    case EvidenceCategory::quantitative_metric: return "quantitative_metric";
    case EvidenceCategory::temporal_pattern: return "temporal_pattern";
    case EvidenceCategory::content_similarity: return "content_similarity";
    case EvidenceCategory::network_structure: return "network_structure";
  }
  return "?";
}

std::optional<EvidenceCategory> parse_evidence_category(const std::string& s) {
  if (s == "quantitative_metric") return EvidenceCategory::quantitative_metric;
  if (s == "temporal_pattern") return EvidenceCategory::temporal_pattern;
  if (s == "content_similarity") return EvidenceCategory::content_similarity;
  if (s == "network_structure") return EvidenceCategory::network_structure;
  return std::nullopt;
}

const char* claim_strength_name(ClaimStrength s) {
  switch (s) {
    case ClaimStrength::weak: return "weak";
    case ClaimStrength::moderate: return "moderate";
    case ClaimStrength::strong: return "strong";
  }
  return "?";
}

std::optional<ClaimStrength> parse_claim_strength(const std::string& s) {
  if (s == "weak") return ClaimStrength::weak;
  if (s == "moderate") return ClaimStrength::moderate;
  if (s == "strong") return ClaimStrength::strong;
  return std::nullopt;
}

namespace {

const char* extractor_name(ExtractorKind k) {
  switch (k) {
    case ExtractorKind::cell: return "cell";
    case ExtractorKind::count_rows: return "count_rows";
    case ExtractorKind::max: return "max";
    case ExtractorKind::min: return "min";
    case ExtractorKind::mean: return "mean";
    case ExtractorKind::stddev: return "stddev";
    case ExtractorKind::ratio: return "ratio";
    case ExtractorKind::share_above: return "share_above";
  }
  return "?";
}

std::optional<ExtractorKind> parse_extractor(const std::string& s) {
  if (s == "cell") return ExtractorKind::cell;
  if (s == "count_rows") return ExtractorKind::count_rows;
  if (s == "max") return ExtractorKind::max;
  if (s == "min") return ExtractorKind::min;
  if (s == "mean") return ExtractorKind::mean;
  if (s == "stddev") return ExtractorKind::stddev;
  if (s == "ratio") return ExtractorKind::ratio;
  if (s == "share_above") return ExtractorKind::share_above;
  return std::nullopt;
}

json metric_to_json(const MetricDefinition& m) {
  json j = {{"name", m.name},
            {"query_index", m.query_index},
            {"extractor", extractor_name(m.kind)}};
  switch (m.kind) {
    case ExtractorKind::cell:
      j["row"] = m.row;
      j["column"] = m.column;
      break;
    case ExtractorKind::count_rows:
      break;
    case ExtractorKind::max:
    case ExtractorKind::min:
    case ExtractorKind::mean:
    case ExtractorKind::stddev:
      j["column"] = m.column;
      break;
    case ExtractorKind::ratio:
      j["column"] = m.column;
      j["column_b"] = m.column_b;
      break;
    case ExtractorKind::share_above:
      j["column"] = m.column;
      j["threshold"] = m.threshold;
      break;
  }
  return j;
}

MetricDefinition metric_from_json(const json& j, std::vector<std::string>& problems,
                                  const std::string& where) {
  MetricDefinition m;
  m.name = j.value("name", "");
  if (m.name.empty()) problems.push_back(where + ": metric name missing");
  if (!j.contains("query_index") || !j["query_index"].is_number_integer()) {
    problems.push_back(where + ": query_index missing");
  } else {
    m.query_index = j["query_index"].get<int>();
  }
  const std::string kind = j.value("extractor", "");
  auto k = parse_extractor(kind);
  if (!k) {
    problems.push_back(where + ": unknown extractor '" + kind + "'");
    return m;
  }
  m.kind = *k;
  auto need_column = [&](const char* key) {
    if (!j.contains(key) || !j[key].is_string() || j[key].get<std::string>().empty()) {
      problems.push_back(where + ": extractor " + kind + " requires '" + key + "'");
      return std::string();
    }
    return j[key].get<std::string>();
  };
  switch (m.kind) {
    case ExtractorKind::cell:
      m.row = j.value("row", 0);
      m.column = need_column("column");
      break;
    case ExtractorKind::count_rows:
      break;
    case ExtractorKind::max:
    case ExtractorKind::min:
    case ExtractorKind::mean:
    case ExtractorKind::stddev:
      m.column = need_column("column");
      break;
    case ExtractorKind::ratio:
      m.column = need_column("column");
      m.column_b = need_column("column_b");
      break;
    case ExtractorKind::share_above:
      m.column = need_column("column");
      if (!j.contains("threshold") || !j["threshold"].is_number()) {
        problems.push_back(where + ": share_above requires a numeric threshold");
      } else {
        m.threshold = j["threshold"].get<double>();
      }
      break;
  }
  return m;
}

}  // namespace

json plan_to_json(const InvestigationPlan& p) {
  json checks = json::array();
  for (const auto& c : p.rubric.checks) {
    checks.push_back({{"metric", c.metric},
                      {"comparator", comparator_symbol(c.comparator)},
                      {"threshold", c.threshold},
                      {"points", c.points}});
  }
  json metrics = json::array();
  for (const auto& m : p.metrics) metrics.push_back(metric_to_json(m));
  return json{{"technique_id", p.technique_id},
              {"evidence_type", p.evidence_type},
              {"hypothesis", p.hypothesis},
              {"analysis_steps", p.analysis_steps},
              {"queries", p.queries},
              {"metrics", metrics},
              {"rubric", {{"checks", checks}}},
              {"pass_threshold", p.pass_threshold},
              {"fail_threshold", p.fail_threshold}};
}

InvestigationPlan plan_from_json(const json& doc, double default_pass, double default_fail) {
  std::vector<std::string> problems;
  InvestigationPlan p;
  if (!doc.is_object()) {
    throw ValidationError("plan is not a JSON object", {"plan is not a JSON object"});
  }
  p.technique_id = doc.value("technique_id", "");
  p.evidence_type = doc.value("evidence_type", "");
  p.hypothesis = doc.value("hypothesis", "");
  if (doc.contains("analysis_steps") && doc["analysis_steps"].is_array()) {
    for (const auto& s : doc["analysis_steps"]) {
      if (s.is_string()) p.analysis_steps.push_back(s.get<std::string>());
    }
  }
  if (!doc.contains("queries") || !doc["queries"].is_array() || doc["queries"].empty()) {
    problems.push_back("plan: queries missing or empty");
  } else {
    for (const auto& q : doc["queries"]) {
      if (!q.is_string()) {
        problems.push_back("plan: query entries must be strings");
      } else {
        p.queries.push_back(q.get<std::string>());
      }
    }
  }
  if (doc.contains("metrics") && doc["metrics"].is_array()) {
    int i = 0;
    for (const auto& m : doc["metrics"]) {
      p.metrics.push_back(metric_from_json(m, problems, "metric #" + std::to_string(i++)));
    }
  }
  if (doc.contains("rubric") && doc["rubric"].is_object() && doc["rubric"].contains("checks") &&
      doc["rubric"]["checks"].is_array()) {
    int i = 0;
    for (const auto& c : doc["rubric"]["checks"]) {
      const std::string where = "rubric check #" + std::to_string(i++);
      RubricCheck rc;
      rc.metric = c.value("metric", "");
      if (rc.metric.empty()) problems.push_back(where + ": metric name missing");
      auto cmp = parse_comparator(c.value("comparator", ""));
      if (!cmp) {
        problems.push_back(where + ": bad comparator");
      } else {
        rc.comparator = *cmp;
      }
      if (!c.contains("threshold") || !c["threshold"].is_number()) {
        problems.push_back(where + ": numeric threshold required");
      } else {
        rc.threshold = c["threshold"].get<double>();
      }
      rc.points = c.value("points", 0.0);
      p.rubric.checks.push_back(std::move(rc));
    }
  } else {
    problems.push_back("plan: rubric.checks missing");
  }
  p.pass_threshold = doc.value("pass_threshold", default_pass);
  p.fail_threshold = doc.value("fail_threshold", default_fail);
  if (!problems.empty()) {
    throw ValidationError("plan failed schema validation: " + problems.front(), problems);
  }
  return p;
}

json condition_to_json(const DetectionCondition& c) {
  json j = {{"feature_query", c.feature_query},
            {"comparator", comparator_symbol(c.comparator)},
            {"description", c.description}};
  if (c.threshold) {
    j["threshold"] = *c.threshold;
  } else {
    j["threshold"] = nullptr;
  }
  return j;
}

DetectionCondition condition_from_json(const json& doc) {
  DetectionCondition c;
  c.feature_query = doc.value("feature_query", "");
  c.description = doc.value("description", "");
  auto cmp = parse_comparator(doc.value("comparator", ""));
  if (cmp && *cmp != Comparator::eq) c.comparator = *cmp;
  if (doc.contains("threshold") && doc["threshold"].is_number()) {
    const double t = doc["threshold"].get<double>();
    if (std::isfinite(t)) c.threshold = t;
  }
  return c;
}

json claim_draft_to_json(const AtomicClaimDraft& d) {
  return json{{"claim_text", d.claim_text},
              {"evidence_type", evidence_category_name(d.category)},
              {"strength", claim_strength_name(d.strength)},
              {"condition", condition_to_json(d.condition)}};
}

AtomicClaimDraft claim_draft_from_json(const json& doc) {
  std::vector<std::string> problems;
  AtomicClaimDraft d;
  d.claim_text = doc.value("claim_text", "");
  if (d.claim_text.empty()) problems.push_back("claim: claim_text missing");
  auto cat = parse_evidence_category(doc.value("evidence_type", ""));
  if (!cat) {
    problems.push_back("claim: evidence_type must be one of quantitative_metric, "
                       "temporal_pattern, content_similarity, network_structure");
  } else {
    d.category = *cat;
  }
  auto st = parse_claim_strength(doc.value("strength", ""));
  if (!st) {
    problems.push_back("claim: strength must be weak, moderate or strong");
  } else {
    d.strength = *st;
  }
  if (!doc.contains("condition") || !doc["condition"].is_object()) {
    problems.push_back("claim: condition missing");
  } else {
    d.condition = condition_from_json(doc["condition"]);
    if (d.condition.feature_query.empty()) problems.push_back("claim: condition.feature_query missing");
    if (!parse_comparator(doc["condition"].value("comparator", ""))) {
      problems.push_back("claim: condition.comparator missing or invalid");
    }
  }
  if (!problems.empty()) {
    throw ValidationError("claim failed schema validation: " + problems.front(), problems);
  }
  return d;
}

std::vector<std::string> validate_plan(const InvestigationPlan& p, const Taxonomy& taxonomy) {
  std::vector<std::string> problems;
  if (!taxonomy.lookup(p.technique_id)) {
    problems.push_back("technique_id '" + p.technique_id + "' not present in taxonomy");
  }
  if (p.evidence_type.empty()) problems.push_back("evidence_type is empty");
  if (p.queries.empty()) problems.push_back("plan has no queries");
  for (std::size_t i = 0; i < p.queries.size(); ++i) {
    const auto check = check_readonly_sql(p.queries[i]);
    if (!check.ok) {
      problems.push_back("query #" + std::to_string(i) + " rejected by sandbox: " + check.reason +
                         (check.token.empty() ? "" : " ('" + check.token + "')"));
    }
  }
  std::map<std::string, int> metric_names;
  for (const auto& m : p.metrics) {
    if (m.query_index < 0 || m.query_index >= static_cast<int>(p.queries.size())) {
      problems.push_back("metric '" + m.name + "' references query #" +
                         std::to_string(m.query_index) + " which does not exist");
    }
    if (++metric_names[m.name] == 2) {
      problems.push_back("metric '" + m.name + "' defined more than once");
    }
  }
  if (p.rubric.checks.empty()) {
    problems.push_back("rubric has no checks");
  }
  for (const auto& c : p.rubric.checks) {
    if (!metric_names.count(c.metric)) {
      problems.push_back("rubric check references undefined metric '" + c.metric + "'");
    }
    if (!(c.points > 0.0)) {
      problems.push_back("rubric check on '" + c.metric + "' must have points > 0");
    }
  }
  const double total = p.rubric.total_points();
  if (std::abs(total - 10.0) > 1e-9) {
    problems.push_back("rubric points sum to " + format_number(total) + ", expected exactly 10");
  }
  if (!(p.fail_threshold < p.pass_threshold)) {
    problems.push_back("fail_threshold must be strictly below pass_threshold");
  }
  if (p.pass_threshold < 0.0 || p.pass_threshold > 10.0 || p.fail_threshold < 0.0 ||
      p.fail_threshold > 10.0) {
    problems.push_back("thresholds must lie in [0, 10]");
  }
  return problems;
}

}  // namespace fimikit
