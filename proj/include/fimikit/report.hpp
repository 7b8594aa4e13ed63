#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fimikit/store.hpp"
#include "fimikit/taxonomy.hpp"

namespace fimikit {

struct PassRateRow {
  std::string dataset;
  std::int64_t n = 0;
  std::int64_t pass = 0;
  std::int64_t fail = 0;
  double pass_rate = 0.0;  // percentage, half-up to one decimal
};

struct PassRateTable {
  std::vector<PassRateRow> rows;  // one per dataset, dataset name ascending
  PassRateRow combined;
  bool empty = true;
  std::string notice;  // set when there is nothing to aggregate
};

// round-half-up(100 * pass / n) to one decimal; the rule under which the
// published aggregates reproduce bit-for-bit.
double pass_rate_percent(std::int64_t pass, std::int64_t n);

// Atomic evidence level: one unit per verified claim.
PassRateTable atomic_pass_rate(Store& store, const std::vector<std::int64_t>& run_ids);

// Technique detection level: one unit per investigation round (EDA excluded,
// failed rounds included); a round passes iff any of its claims verified PASS.
PassRateTable technique_pass_rate(Store& store, const std::vector<std::int64_t>& run_ids);

// Full provenance chain for one atomic evidence id.
struct TraceChain {
  AtomicClaim claim;
  std::optional<VerificationResult> verification;
  Finding finding;
  std::int64_t run_id = 0;
  int iteration_index = 0;
  std::string technique_id;
  std::string technique_name;  // resolved against the loaded taxonomy
  std::vector<std::string> queries_executed;
};

// Throws UserError for unknown ids and StoreError naming the broken link
// when the chain does not resolve (tampered store).
TraceChain trace(Store& store, const Taxonomy& taxonomy, std::int64_t evidence_id);

std::string trace_to_text(const TraceChain& chain);

enum class ReportFormat { markdown, structured };

struct CostPricing {
  double prompt_usd_per_1m = 0.0;
  double completion_usd_per_1m = 0.0;
};

// Renders the full run report. Markdown section order is fixed:
// summary, pass-rate tables, rounds, verifications, cost. The structured
// format mirrors the store tables field for field.
std::string export_report(Store& store, const Taxonomy& taxonomy, std::int64_t run_id,
                          ReportFormat format, const CostPricing& pricing = {});

}  // namespace fimikit
