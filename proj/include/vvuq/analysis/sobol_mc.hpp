#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "vvuq/core/errors.hpp"
#include "vvuq/core/rng.hpp"
#include "vvuq/sampling/distribution.hpp"

namespace vvuq::analysis {

struct SobolMcResult {
  std::vector<double> first;
  std::vector<double> total;
  std::vector<double> first_se;  // bootstrap standard errors
  std::vector<double> total_se;
  double variance = 0.0;
  std::size_t evaluations = 0;
};

namespace detail {

struct PickFreezeSums {
  std::vector<double> first, total;
  double variance;
};

// Saltelli (2010) first-order and Jansen total-order estimators over the
// rows listed in `rows`.
inline PickFreezeSums pick_freeze(std::span<const double> fa, std::span<const double> fb,
                                  const std::vector<std::vector<double>>& fab,
                                  std::span<const std::size_t> rows) {
  const std::size_t d = fab.size();
  const double n = static_cast<double>(rows.size());
  double mean = 0.0;
  for (auto r : rows) mean += fa[r] + fb[r];
  mean /= 2.0 * n;
  double var = 0.0;
  for (auto r : rows) var += (fa[r] - mean) * (fa[r] - mean) + (fb[r] - mean) * (fb[r] - mean);
  var /= 2.0 * n - 1.0;
  PickFreezeSums out{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0), var};
  for (std::size_t i = 0; i < d; ++i) {
    double s1 = 0.0, st = 0.0;
    for (auto r : rows) {
      s1 += fb[r] * (fab[i][r] - fa[r]);
      st += (fa[r] - fab[i][r]) * (fa[r] - fab[i][r]);
    }
    out.first[i] = var > 0.0 ? s1 / n / var : 0.0;
    out.total[i] = var > 0.0 ? st / (2.0 * n) / var : 0.0;
  }
  return out;
}

}  // namespace detail

/// Pick-freeze Monte Carlo Sobol indices using (d+2)*n evaluations of
/// `model(std::span<const double>) -> double`. Standard errors come from a
/// row bootstrap over the same evaluations.
template <class Model>
SobolMcResult sobol_mc(Model&& model, std::span<const sampling::Distribution1D> inputs,
                       std::size_t n, std::uint64_t seed, std::size_t bootstrap_replicates = 100) {
  if (n < 2) throw DomainError("pick-freeze estimator needs n >= 2");
  const std::size_t d = inputs.size();
  if (d == 0) throw DomainError("pick-freeze estimator needs at least one input");

  const CounterRng stream_a(seed, 0), stream_b(seed, 1);
  std::vector<double> a(n * d), b(n * d);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t i = 0; i < d; ++i) {
      a[r * d + i] = inputs[i].quantile(stream_a.uniform_at(r * d + i));
      b[r * d + i] = inputs[i].quantile(stream_b.uniform_at(r * d + i));
    }

  std::vector<double> fa(n), fb(n);
  std::vector<std::vector<double>> fab(d, std::vector<double>(n));
  std::vector<double> x(d);
  for (std::size_t r = 0; r < n; ++r) {
    fa[r] = model(std::span<const double>(&a[r * d], d));
    fb[r] = model(std::span<const double>(&b[r * d], d));
    for (std::size_t i = 0; i < d; ++i) {
      std::copy_n(&a[r * d], d, x.begin());
      x[i] = b[r * d + i];
      fab[i][r] = model(std::span<const double>(x));
    }
  }

  std::vector<std::size_t> rows(n);
  for (std::size_t r = 0; r < n; ++r) rows[r] = r;
  const auto est = detail::pick_freeze(fa, fb, fab, rows);

  SobolMcResult result;
  result.first = est.first;
  result.total = est.total;
  result.variance = est.variance;
  result.evaluations = (d + 2) * n;
  result.first_se.assign(d, 0.0);
  result.total_se.assign(d, 0.0);

  if (bootstrap_replicates >= 2) {
    CounterRng rng(seed, 2);
    std::vector<double> s1(d, 0.0), s1sq(d, 0.0), st(d, 0.0), stsq(d, 0.0);
    for (std::size_t rep = 0; rep < bootstrap_replicates; ++rep) {
      for (auto& r : rows) r = static_cast<std::size_t>(rng.below(n));
      const auto e = detail::pick_freeze(fa, fb, fab, rows);
      for (std::size_t i = 0; i < d; ++i) {
        s1[i] += e.first[i];
        s1sq[i] += e.first[i] * e.first[i];
        st[i] += e.total[i];
        stsq[i] += e.total[i] * e.total[i];
      }
    }
    const double B = static_cast<double>(bootstrap_replicates);
    for (std::size_t i = 0; i < d; ++i) {
      result.first_se[i] = std::sqrt(std::max(0.0, (s1sq[i] - s1[i] * s1[i] / B) / (B - 1.0)));
      result.total_se[i] = std::sqrt(std::max(0.0, (stsq[i] - st[i] * st[i] / B) / (B - 1.0)));
    }
  }
  return result;
}

}  // namespace vvuq::analysis
