#include "fimikit/evidence.hpp"

#include <chrono>
#include <cmath>

#include <nlohmann/json.hpp>

#include "fimikit/common.hpp"
#include "fimikit/store.hpp"

namespace fimikit {

using nlohmann::json;

const char* finding_status_name(FindingStatus s) {
  switch (s) {
    case FindingStatus::PASS: return "PASS";
    case FindingStatus::INCONCLUSIVE: return "INCONCLUSIVE";
    case FindingStatus::FAIL: return "FAIL";
  }
  return "?";
}

namespace {

// Numeric values of one named column, nulls skipped.
std::vector<double> column_numbers(const Table& t, const std::string& column, std::string& err) {
  const int idx = t.column_index(column);
  if (idx < 0) {
    err = "column '" + column + "' not present in result";
    return {};
  }
  std::vector<double> out;
  out.reserve(t.rows.size());
  for (const auto& row : t.rows) {
    if (cell_is_null(row[idx])) continue;
    auto v = cell_as_number(row[idx]);
    if (v) out.push_back(*v);
  }
  return out;
}

struct Extracted {
  bool available = false;
  double value = 0.0;
  std::string reason;
};

Extracted unavailable(std::string reason) {
  Extracted e;
  e.reason = std::move(reason);
  return e;
}

Extracted available(double v) {
  Extracted e;
  e.available = true;
  e.value = v;
  return e;
}

Extracted apply_extractor(const MetricDefinition& m, const Table& t) {
  std::string err;
  switch (m.kind) {
    case ExtractorKind::count_rows:
      return available(static_cast<double>(t.rows.size()));
    case ExtractorKind::cell: {
      if (m.row < 0 || m.row >= static_cast<int>(t.rows.size())) {
        return unavailable("row " + std::to_string(m.row) + " out of range (result has " +
                           std::to_string(t.rows.size()) + " rows)");
      }
      const int idx = t.column_index(m.column);
      if (idx < 0) return unavailable("column '" + m.column + "' not present in result");
      const Cell& c = t.rows[m.row][idx];
      if (cell_is_null(c)) return unavailable("cell is NULL");
      auto v = cell_as_number(c);
      if (!v) return unavailable("cell is not numeric");
      return available(*v);
    }
    case ExtractorKind::max:
    case ExtractorKind::min:
    case ExtractorKind::mean:
    case ExtractorKind::stddev: {
      auto vals = column_numbers(t, m.column, err);
      if (!err.empty()) return unavailable(err);
      if (vals.empty()) return unavailable("no numeric values in column '" + m.column + "'");
      if (m.kind == ExtractorKind::max) {
        double best = vals[0];
        for (double v : vals) best = std::max(best, v);
        return available(best);
      }
      if (m.kind == ExtractorKind::min) {
        double best = vals[0];
        for (double v : vals) best = std::min(best, v);
        return available(best);
      }
      double sum = 0.0;
      for (double v : vals) sum += v;
      const double mean = sum / static_cast<double>(vals.size());
      if (m.kind == ExtractorKind::mean) return available(mean);
      // population standard deviation
      double ss = 0.0;
      for (double v : vals) ss += (v - mean) * (v - mean);
      return available(std::sqrt(ss / static_cast<double>(vals.size())));
    }
    case ExtractorKind::ratio: {
      auto num = column_numbers(t, m.column, err);
      if (!err.empty()) return unavailable(err);
      std::string err2;
      auto den = column_numbers(t, m.column_b, err2);
      if (!err2.empty()) return unavailable(err2);
      if (num.empty() || den.empty()) return unavailable("empty column for ratio");
      double mx = num[0];
      for (double v : num) mx = std::max(mx, v);
      double sum = 0.0;
      for (double v : den) sum += v;
      const double mean = sum / static_cast<double>(den.size());
      if (mean == 0.0) return unavailable("ratio denominator mean is zero");
      return available(mx / mean);
    }
    case ExtractorKind::share_above: {
      auto vals = column_numbers(t, m.column, err);
      if (!err.empty()) return unavailable(err);
      if (vals.empty()) return unavailable("no numeric values in column '" + m.column + "'");
      std::int64_t above = 0;
      for (double v : vals) {
        if (v > m.threshold) ++above;
      }
      return available(static_cast<double>(above) / static_cast<double>(vals.size()));
    }
  }
  return unavailable("unknown extractor");
}

}  // namespace

MetricOutcome execute_plan(Store& store, const InvestigationPlan& plan, const QueryLimits& limits,
                           std::vector<QueryLogEntry>& log) {
  std::vector<Table> results(plan.queries.size());
  std::vector<bool> query_ok(plan.queries.size(), false);
  std::vector<std::string> query_err(plan.queries.size());

  for (std::size_t i = 0; i < plan.queries.size(); ++i) {
    QueryLogEntry entry;
    entry.query = plan.queries[i];
    const auto t0 = std::chrono::steady_clock::now();
    try {
      results[i] = store.run_readonly_query(plan.queries[i], limits);
      query_ok[i] = true;
      entry.row_count = static_cast<std::int64_t>(results[i].rows.size());
    } catch (const Error& e) {
      entry.ok = false;
      entry.error = e.what();
      query_err[i] = e.what();
    }
    entry.duration_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    log.push_back(std::move(entry));
  }

  MetricOutcome out;
  for (const auto& m : plan.metrics) {
    if (m.query_index < 0 || m.query_index >= static_cast<int>(results.size())) {
      out.unavailable[m.name] = "query index out of range";
      continue;
    }
    if (!query_ok[m.query_index]) {
      out.unavailable[m.name] = "query failed: " + query_err[m.query_index];
      continue;
    }
    const Extracted e = apply_extractor(m, results[m.query_index]);
    if (e.available) {
      out.values[m.name] = e.value;
    } else {
      out.unavailable[m.name] = e.reason;
    }
  }
  return out;
}

double score_finding(const ScoringRubric& rubric, const MetricOutcome& metrics) {
  double score = 0.0;
  for (const auto& check : rubric.checks) {
    auto it = metrics.values.find(check.metric);
    if (it == metrics.values.end()) continue;  // unavailable earns 0
    if (comparator_holds(check.comparator, it->second, check.threshold)) {
      score += check.points;
    }
  }
  return round_half_up_1(score);
}

FindingStatus classify_status(double score, double pass_threshold, double fail_threshold) {
  if (score >= pass_threshold) return FindingStatus::PASS;
  if (score < fail_threshold) return FindingStatus::FAIL;
  return FindingStatus::INCONCLUSIVE;
}

json metric_outcome_to_json(const MetricOutcome& m) {
  json values = json::object();
  for (const auto& [k, v] : m.values) values[k] = v;
  json unavailable = json::object();
  for (const auto& [k, v] : m.unavailable) unavailable[k] = v;
  return json{{"values", values}, {"unavailable", unavailable}};
}

MetricOutcome metric_outcome_from_json(const json& doc) {
  MetricOutcome m;
  if (doc.contains("values")) {
    for (const auto& [k, v] : doc["values"].items()) {
      if (v.is_number()) m.values[k] = v.get<double>();
    }
  }
  if (doc.contains("unavailable")) {
    for (const auto& [k, v] : doc["unavailable"].items()) {
      m.unavailable[k] = v.is_string() ? v.get<std::string>() : "";
    }
  }
  return m;
}

json query_log_to_json(const std::vector<QueryLogEntry>& log) {
  json arr = json::array();
  for (const auto& e : log) {
    arr.push_back({{"query", e.query},
                   {"row_count", e.row_count},
                   {"duration_ms", e.duration_ms},
                   {"ok", e.ok},
                   {"error", e.error}});
  }
  return arr;
}

std::vector<QueryLogEntry> query_log_from_json(const json& doc) {
  std::vector<QueryLogEntry> out;
  if (!doc.is_array()) return out;
  for (const auto& j : doc) {
    QueryLogEntry e;
    e.query = j.value("query", "");
    e.row_count = j.value("row_count", static_cast<std::int64_t>(0));
    e.duration_ms = j.value("duration_ms", 0.0);
    e.ok = j.value("ok", true);
    e.error = j.value("error", "");
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace fimikit
