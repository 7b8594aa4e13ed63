#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace fimikit {

// 2x2 contingency table of detection outcomes against ground-truth labels.
// Rows are predicted positive/negative, columns are labeled positive/negative:
//
//              labeled+   labeled-
//   predicted+    tp         fp
//   predicted-    fn         tn
struct ConfusionMatrix {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t tn = 0;

  std::int64_t total() const { return tp + fp + fn + tn; }
  std::int64_t labeled_positive() const { return tp + fn; }
  std::int64_t labeled_negative() const { return fp + tn; }
};

struct OddsRatio {
  double value = 0.0;
  // Haldane-Anscombe +0.5 applied because some cell was zero.
  bool corrected = false;
};

// (tp*tn)/(fp*fn). Any zero cell triggers the +0.5 correction on all four
// cells, so the result is always finite and positive.
OddsRatio odds_ratio(const ConfusionMatrix& m);

// Two-sided Fisher exact test, point-probability definition: the sum of the
// hypergeometric probabilities of every table with the same margins that is
// at most as likely as the observed one. Result is in (0, 1].
//
// Tables with N <= 60 use exact integer binomials, so tie decisions are
// never subject to rounding; larger tables accumulate log-factorials with a
// relative tie tolerance of 1e-7.
double fisher_exact_two_sided(const ConfusionMatrix& m);

enum class VerdictStatus { PASS, FAIL };

// Outcome of machine verification for one atomic claim. PASS requires all
// three criteria: an explicit threshold in the condition, odds ratio >= 3.0,
// and p < 0.05 (both comparisons exact and strict per the criteria text).
// Matrix/OR/p are absent when the condition could not be applied at all
// (no threshold, failed feature query, degenerate labels).
struct VerificationResult {
  std::int64_t evidence_id = 0;
  std::int64_t run_id = 0;
  std::optional<ConfusionMatrix> matrix;
  std::optional<double> odds;
  bool odds_corrected = false;
  std::optional<double> p_value;
  bool criterion_explicit_threshold = false;
  bool criterion_effect_size = false;
  bool criterion_significance = false;
  VerdictStatus status = VerdictStatus::FAIL;
  std::string error;  // why verification could not run, when it could not
};

const char* verdict_status_name(VerdictStatus s);

}  // namespace fimikit
