#include "fimikit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "fimikit/common.hpp"

namespace fimikit {

OddsRatio odds_ratio(const ConfusionMatrix& m) {
  if (m.tp < 0 || m.fp < 0 || m.fn < 0 || m.tn < 0) {
    throw Error("confusion matrix cells must be non-negative");
  }
  OddsRatio r;
  if (m.tp == 0 || m.fp == 0 || m.fn == 0 || m.tn == 0) {
    r.corrected = true;
    const double tp = m.tp + 0.5, fp = m.fp + 0.5, fn = m.fn + 0.5, tn = m.tn + 0.5;
    r.value = (tp * tn) / (fp * fn);
  } else {
    r.value = (static_cast<double>(m.tp) * static_cast<double>(m.tn)) /
              (static_cast<double>(m.fp) * static_cast<double>(m.fn));
  }
  return r;
}

namespace {

constexpr int kExactLimit = 60;  // C(60,30) < 2^63, so products stay exact

const std::uint64_t* pascal_row(int n) {
  // Triangle flattened row-major; built once.
  static const std::vector<std::uint64_t> table = [] {
    std::vector<std::uint64_t> t((kExactLimit + 1) * (kExactLimit + 1), 0);
    for (int n = 0; n <= kExactLimit; ++n) {
      t[n * (kExactLimit + 1)] = 1;
      for (int k = 1; k <= n; ++k) {
        t[n * (kExactLimit + 1) + k] = t[(n - 1) * (kExactLimit + 1) + k - 1] +
                                       (k <= n - 1 ? t[(n - 1) * (kExactLimit + 1) + k] : 0);
      }
    }
    return t;
  }();
  return &table[n * (kExactLimit + 1)];
}

double fisher_exact_small(std::int64_t r1, std::int64_t r2, std::int64_t c1, std::int64_t a) {
  const auto* row1 = pascal_row(static_cast<int>(r1));
  const auto* row2 = pascal_row(static_cast<int>(r2));
  const std::int64_t lo = std::max<std::int64_t>(0, c1 - r2);
  const std::int64_t hi = std::min(r1, c1);
  // By Vandermonde each product is <= C(N, c1), so uint64 never overflows.
  const std::uint64_t weight_obs = row1[a] * row2[c1 - a];
  std::uint64_t qualifying = 0;
  std::uint64_t total = 0;
  for (std::int64_t x = lo; x <= hi; ++x) {
    const std::uint64_t w = row1[x] * row2[c1 - x];
    total += w;
    if (w <= weight_obs) qualifying += w;
  }
  return std::min(1.0, static_cast<double>(static_cast<long double>(qualifying) /
                                           static_cast<long double>(total)));
}

double fisher_exact_large(std::int64_t r1, std::int64_t r2, std::int64_t c1, std::int64_t a) {
  const std::int64_t n = r1 + r2;
  std::vector<double> lfact(static_cast<std::size_t>(n) + 1, 0.0);
  for (std::int64_t i = 2; i <= n; ++i) {
    lfact[i] = lfact[i - 1] + std::log(static_cast<double>(i));
  }
  auto lchoose = [&](std::int64_t nn, std::int64_t kk) {
    return lfact[nn] - lfact[kk] - lfact[nn - kk];
  };
  const double denom = lchoose(n, c1);
  auto logp = [&](std::int64_t x) {
    return lchoose(r1, x) + lchoose(r2, c1 - x) - denom;
  };
  const std::int64_t lo = std::max<std::int64_t>(0, c1 - r2);
  const std::int64_t hi = std::min(r1, c1);
  const double lp_obs = logp(a);
  double p = 0.0;
  for (std::int64_t x = lo; x <= hi; ++x) {
    const double lp = logp(x);
    if (lp <= lp_obs + 1e-7) p += std::exp(lp);
  }
  return std::min(1.0, p);
}

}  // namespace

const char* verdict_status_name(VerdictStatus s) {
  return s == VerdictStatus::PASS ? "PASS" : "FAIL";
}

double fisher_exact_two_sided(const ConfusionMatrix& m) {
  if (m.tp < 0 || m.fp < 0 || m.fn < 0 || m.tn < 0) {
    throw Error("confusion matrix cells must be non-negative");
  }
  const std::int64_t n = m.total();
  if (n < 1) throw Error("fisher test requires at least one observation");
  const std::int64_t r1 = m.tp + m.fp;
  const std::int64_t r2 = m.fn + m.tn;
  const std::int64_t c1 = m.tp + m.fn;
  if (n <= kExactLimit) return fisher_exact_small(r1, r2, c1, m.tp);
  return fisher_exact_large(r1, r2, c1, m.tp);
}

}  // namespace fimikit
