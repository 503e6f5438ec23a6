#pragma once

// Independent reference computations used to freeze expected values in the
// tests. Nothing here calls into the library code paths it checks, apart
// from the 1-D rules that seed the sparse-grid oracle.

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "vvuq/sampling/quadrature.hpp"

namespace vvuq::testing {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Standard-normal quantile by bisection on the erfc-based CDF.
inline double normal_quantile_bisection(double u) {
  double lo = -40.0, hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (normal_cdf(mid) < u) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

/// E[x^k] for x ~ U(-1,1).
inline double uniform_moment(int k) { return k % 2 == 1 ? 0.0 : 1.0 / (k + 1); }

/// E[x^k] for x ~ N(0,1): (k-1)!! for even k.
inline double normal_moment(int k) {
  if (k % 2 == 1) return 0.0;
  double m = 1.0;
  for (int j = k - 1; j > 0; j -= 2) m *= j;
  return m;
}

/// Brute-force combination technique: every k in [0,L]^d, coefficient by
/// inclusion-exclusion sum_{z in {0,1}^d, |k+z| <= L} (-1)^|z|, exact-key
/// merge. Returns point -> combined weight.
inline std::map<std::vector<double>, double> smolyak_oracle(
    const std::vector<sampling::RuleKind>& kinds, int level) {
  const std::size_t d = kinds.size();
  std::map<std::vector<double>, double> out;
  std::vector<int> k(d, 0);
  while (true) {
    int norm = 0;
    for (int v : k) norm += v;
    if (norm <= level) {
      long long coef = 0;
      for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << d); ++mask) {
        const int bits = __builtin_popcountll(mask);
        if (norm + bits <= level) coef += bits % 2 == 0 ? 1 : -1;
      }
      if (coef != 0) {
        std::vector<sampling::QuadRule> rules;
        for (std::size_t i = 0; i < d; ++i) rules.push_back(sampling::rule_at_level(kinds[i], k[i]));
        std::vector<std::size_t> idx(d, 0);
        while (true) {
          std::vector<double> p(d);
          double w = static_cast<double>(coef);
          for (std::size_t i = 0; i < d; ++i) {
            p[i] = rules[i].nodes[idx[i]];
            w *= rules[i].weights[idx[i]];
          }
          out[p] += w;
          std::size_t i = 0;
          for (; i < d; ++i) {
            if (++idx[i] < rules[i].size()) break;
            idx[i] = 0;
          }
          if (i == d) break;
        }
      }
    }
    std::size_t i = 0;
    for (; i < d; ++i) {
      if (++k[i] <= level) break;
      k[i] = 0;
    }
    if (i == d) break;
  }
  return out;
}

/// Quadratic-time W1: at every breakpoint interval, count CDF values directly.
inline double wasserstein_oracle(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> pts(a);
  pts.insert(pts.end(), b.begin(), b.end());
  std::sort(pts.begin(), pts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double x = pts[i];
    double fa = 0.0, fb = 0.0;
    for (double v : a) fa += v <= x ? 1.0 : 0.0;
    for (double v : b) fb += v <= x ? 1.0 : 0.0;
    total += std::abs(fa / a.size() - fb / b.size()) * (pts[i + 1] - x);
  }
  return total;
}

}  // namespace vvuq::testing
