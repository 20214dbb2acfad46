#pragma once

#include <algorithm>
#include <vector>

#include "pvse/common.hpp"

namespace pvse {

/// Ranks with ties averaged.
inline std::vector<double> ranks(const std::vector<double>& values) {
  const size_t n = values.size();
  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return values[a] < values[b]; });
  std::vector<double> r(n, 0.0);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
    for (size_t k = i; k <= j; ++k) r[order[k]] = avg;
    i = j + 1;
  }
  return r;
}

/// Spearman rank correlation (Pearson correlation of the rank vectors).
inline double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2)
    throw Error(ErrorCode::EmptyList, "spearman needs two equal-length series");
  const std::vector<double> ra = ranks(a), rb = ranks(b);
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (size_t k = 0; k < a.size(); ++k) { ma += ra[k]; mb += rb[k]; }
  ma /= n;
  mb /= n;
  double num = 0, va = 0, vb = 0;
  for (size_t k = 0; k < a.size(); ++k) {
    num += (ra[k] - ma) * (rb[k] - mb);
    va += (ra[k] - ma) * (ra[k] - ma);
    vb += (rb[k] - mb) * (rb[k] - mb);
  }
  if (va <= 0.0 || vb <= 0.0) return 0.0;
  return num / std::sqrt(va * vb);
}

/// One-sided paired sign test: p-value of seeing at least `wins` successes in
/// `wins + losses` fair coin flips (ties removed before the call).
inline double sign_test_p(int wins, int losses) {
  const int n = wins + losses;
  if (n == 0) return 1.0;
  // Exact binomial tail via logs.
  std::vector<double> logfact(static_cast<size_t>(n) + 1, 0.0);
  for (int k = 1; k <= n; ++k)
    logfact[static_cast<size_t>(k)] = logfact[static_cast<size_t>(k) - 1] + std::log(k);
  double p = 0.0;
  for (int k = wins; k <= n; ++k) {
    const double lc = logfact[static_cast<size_t>(n)] - logfact[static_cast<size_t>(k)] -
                      logfact[static_cast<size_t>(n - k)];
    p += std::exp(lc - n * std::log(2.0));
  }
  return std::min(p, 1.0);
}

}  // namespace pvse
