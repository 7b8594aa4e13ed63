#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>

#include "fimikit/evidence.hpp"
#include "fimikit/plan.hpp"
#include "fimikit/stats.hpp"
#include "fimikit/store.hpp"

namespace fimikit {

// Verification could not run at all (degenerate labels, broken store state).
class VerifyError : public Error {
 public:
  using Error::Error;
};

struct CompiledCondition {
  DetectionCondition condition;
  // Criterion 1, decided structurally: a finite numeric threshold is present.
  bool explicit_threshold = false;
  // Hard compile failure (sandbox rejection, empty query); such a claim is
  // dropped at extraction time and never persisted.
  bool ok = false;
  std::string error;
};

// Syntactic validation plus the sandbox gate; touches no data.
CompiledCondition compile_condition(const AtomicClaimDraft& draft);

// Runs the feature query (sandboxed, scoped to the run's dataset) and returns
// the labeled accounts whose feature value satisfies the condition. Accounts
// missing from the result are predicted negative; unlabeled accounts are
// ignored. Throws VerifyError when the result repeats an account.
std::set<std::string> apply_condition(Store& store, const DetectionCondition& condition,
                                      const std::map<std::string, Label>& labels,
                                      const QueryLimits& limits);

// Confusion matrix over the labeled accounts. Throws VerifyError when the
// labeling is degenerate (all one class) — such claims cannot be verified.
ConfusionMatrix build_confusion(const std::map<std::string, Label>& labels,
                                const std::set<std::string>& predicted);

// Assembles the three-criterion verdict: explicit threshold, OR >= 3.0,
// p < 0.05. PASS iff all three hold.
VerificationResult verdict(std::int64_t evidence_id, std::int64_t run_id, bool explicit_threshold,
                           const ConfusionMatrix& matrix, const OddsRatio& odds, double p_value);

// Verifies one persisted claim end to end.
VerificationResult verify_claim(Store& store, const AtomicClaim& claim,
                                const std::map<std::string, Label>& labels,
                                const QueryLimits& limits);

// Verifies every unverified claim of the run (all claims when force, wiping
// previous results first). Returns the number of verifications written.
int verify_run(Store& store, std::int64_t run_id, const QueryLimits& limits, bool force = false);

}  // namespace fimikit
