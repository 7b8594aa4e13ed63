#include "fimikit/verifier.hpp"

#include <cmath>

#include "fimikit/common.hpp"
#include "fimikit/sandbox.hpp"

namespace fimikit {

CompiledCondition compile_condition(const AtomicClaimDraft& draft) {
  CompiledCondition out;
  out.condition = draft.condition;
  if (draft.condition.feature_query.empty()) {
    out.error = "condition has no feature query";
    return out;
  }
  const SandboxCheck gate = check_readonly_sql(draft.condition.feature_query);
  if (!gate.ok) {
    out.error = "feature query rejected by sandbox: " + gate.reason +
                (gate.token.empty() ? "" : " ('" + gate.token + "')");
    return out;
  }
  out.ok = true;
  out.explicit_threshold =
      draft.condition.threshold.has_value() && std::isfinite(*draft.condition.threshold);
  return out;
}

std::set<std::string> apply_condition(Store& store, const DetectionCondition& condition,
                                      const std::map<std::string, Label>& labels,
                                      const QueryLimits& limits) {
  if (!condition.threshold) {
    throw VerifyError("condition has no threshold; cannot be applied");
  }
  const Table t = store.run_readonly_query(condition.feature_query, limits);
  if (t.columns.size() < 2) {
    throw VerifyError("feature query must return (account_id, feature_value) columns");
  }
  // Column 0 is the account id; the value column is `feature_value` when
  // named, otherwise column 1.
  int value_col = t.column_index("feature_value");
  if (value_col < 0) value_col = 1;

  std::set<std::string> seen;
  std::set<std::string> predicted;
  for (const auto& row : t.rows) {
    const std::string account = cell_to_string(row[0]);
    if (account.empty()) continue;
    if (!seen.insert(account).second) {
      throw VerifyError("feature query returned account '" + account +
                        "' more than once (one row per account required)");
    }
    const auto value = cell_as_number(row[value_col]);
    if (!value) continue;  // NULL or non-numeric: predicted negative
    if (!labels.count(account)) continue;  // unlabeled accounts are excluded
    if (comparator_holds(condition.comparator, *value, *condition.threshold)) {
      predicted.insert(account);
    }
  }
  return predicted;
}

ConfusionMatrix build_confusion(const std::map<std::string, Label>& labels,
                                const std::set<std::string>& predicted) {
  std::int64_t positives = 0, negatives = 0;
  for (const auto& [_, label] : labels) {
    if (label == Label::positive) ++positives;
    if (label == Label::negative) ++negatives;
  }
  if (positives == 0 || negatives == 0) {
    throw VerifyError("degenerate labeling: need at least one positive and one negative account");
  }
  ConfusionMatrix m;
  for (const auto& account : predicted) {
    auto it = labels.find(account);
    if (it == labels.end()) continue;
    if (it->second == Label::positive) {
      ++m.tp;
    } else {
      ++m.fp;
    }
  }
  m.fn = positives - m.tp;
  m.tn = negatives - m.fp;
  return m;
}

VerificationResult verdict(std::int64_t evidence_id, std::int64_t run_id, bool explicit_threshold,
                           const ConfusionMatrix& matrix, const OddsRatio& odds, double p_value) {
  VerificationResult r;
  r.evidence_id = evidence_id;
  r.run_id = run_id;
  r.matrix = matrix;
  r.odds = odds.value;
  r.odds_corrected = odds.corrected;
  r.p_value = p_value;
  r.criterion_explicit_threshold = explicit_threshold;
  r.criterion_effect_size = odds.value >= 3.0;
  r.criterion_significance = p_value < 0.05;
  r.status = (r.criterion_explicit_threshold && r.criterion_effect_size &&
              r.criterion_significance)
                 ? VerdictStatus::PASS
                 : VerdictStatus::FAIL;
  return r;
}

VerificationResult verify_claim(Store& store, const AtomicClaim& claim,
                                const std::map<std::string, Label>& labels,
                                const QueryLimits& limits) {
  VerificationResult r;
  r.evidence_id = claim.evidence_id;
  r.run_id = claim.run_id;
  r.criterion_explicit_threshold = claim.explicit_threshold;
  r.status = VerdictStatus::FAIL;

  if (!claim.explicit_threshold) {
    r.error = "no explicit numeric threshold in the detection condition";
    return r;
  }
  std::set<std::string> predicted;
  try {
    predicted = apply_condition(store, claim.draft.condition, labels, limits);
  } catch (const Error& e) {
    r.error = std::string("condition could not be applied: ") + e.what();
    return r;
  }
  const ConfusionMatrix matrix = build_confusion(labels, predicted);
  const OddsRatio odds = odds_ratio(matrix);
  const double p = fisher_exact_two_sided(matrix);
  return verdict(claim.evidence_id, claim.run_id, claim.explicit_threshold, matrix, odds, p);
}

int verify_run(Store& store, std::int64_t run_id, const QueryLimits& limits, bool force) {
  auto run = store.load_run(run_id);
  if (!run) throw UserError("unknown run id: " + std::to_string(run_id));
  if (force) store.delete_verifications(run_id);

  const auto claims = store.unverified_claims(run_id);
  if (claims.empty()) return 0;

  const auto labels = store.labeled_accounts(run->dataset);
  std::int64_t positives = 0, negatives = 0;
  for (const auto& [_, label] : labels) {
    if (label == Label::positive) ++positives;
    if (label == Label::negative) ++negatives;
  }
  if (positives == 0 || negatives == 0) {
    throw VerifyError("dataset '" + run->dataset +
                      "' has degenerate labels (positives=" + std::to_string(positives) +
                      ", negatives=" + std::to_string(negatives) + "); claims cannot be verified");
  }
  store.scope_queries_to(run->dataset);

  int written = 0;
  for (const auto& claim : claims) {
    const VerificationResult r = verify_claim(store, claim, labels, limits);
    store.insert_verification(r);
    ++written;
  }
  return written;
}

}  // namespace fimikit
