#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vvuq/core/errors.hpp"

namespace vvuq::vvp {

/// Histogram with strictly increasing edges; masses are normalised to one.
struct Histogram {
  std::vector<double> edges;
  std::vector<double> masses;

  static Histogram make(std::vector<double> edges, std::vector<double> masses) {
    if (edges.size() < 2 || masses.size() + 1 != edges.size())
      throw BinningError("histogram needs n+1 edges for n >= 1 bins");
    for (std::size_t i = 1; i < edges.size(); ++i)
      if (!(edges[i] > edges[i - 1])) throw BinningError("histogram edges must be strictly increasing");
    double total = 0.0;
    for (double m : masses) {
      if (!(m >= 0.0) || !std::isfinite(m)) throw BinningError("histogram masses must be non-negative");
      total += m;
    }
    if (!(total > 0.0)) throw BinningError("histogram has zero total mass");
    for (double& m : masses) m /= total;
    return Histogram{std::move(edges), std::move(masses)};
  }

  std::size_t bins() const { return masses.size(); }
};

/// Samples binned on `edges`; values below the first or above the last edge
/// fall into the end bins.
inline Histogram bin_samples(std::span<const double> samples, const std::vector<double>& edges) {
  if (samples.empty()) throw EmptyInput("cannot bin an empty sample");
  std::vector<double> counts(edges.size() - 1, 0.0);
  for (double x : samples) {
    auto it = std::upper_bound(edges.begin(), edges.end(), x);
    std::ptrdiff_t bin = (it - edges.begin()) - 1;
    bin = std::clamp<std::ptrdiff_t>(bin, 0, static_cast<std::ptrdiff_t>(counts.size()) - 1);
    counts[static_cast<std::size_t>(bin)] += 1.0;
  }
  return Histogram::make(edges, std::move(counts));
}

inline constexpr std::size_t kMaxBins = 100000;

/// Freedman-Diaconis edges computed on the pooled data of both samples.
inline std::vector<double> shared_edges(std::span<const double> a, std::span<const double> b) {
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  if (pooled.empty()) throw EmptyInput("cannot bin an empty sample");
  for (double x : pooled)
    if (!std::isfinite(x)) throw BinningError("samples must be finite");
  std::sort(pooled.begin(), pooled.end());
  const double lo = pooled.front(), hi = pooled.back();
  if (lo == hi) return {lo - 0.5, hi + 0.5};

  auto q = [&](double p) {
    const double h = p * static_cast<double>(pooled.size() - 1);
    const auto i = static_cast<std::size_t>(h);
    const std::size_t j = std::min(i + 1, pooled.size() - 1);
    return pooled[i] + (h - static_cast<double>(i)) * (pooled[j] - pooled[i]);
  };
  const double iqr = q(0.75) - q(0.25);
  const double n = static_cast<double>(pooled.size());
  double width = 2.0 * iqr / std::cbrt(n);
  std::size_t bins = 0;
  if (width > 0.0) bins = static_cast<std::size_t>(std::ceil((hi - lo) / width));
  else bins = static_cast<std::size_t>(std::ceil(std::sqrt(n)));
  bins = std::clamp<std::size_t>(bins, 1, kMaxBins);
  width = (hi - lo) / static_cast<double>(bins);

  std::vector<double> edges(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) edges[i] = lo + width * static_cast<double>(i);
  edges.back() = hi;
  for (std::size_t i = 1; i < edges.size(); ++i)
    if (!(edges[i] > edges[i - 1])) return {lo, hi};
  return edges;
}

inline void require_same_edges(const Histogram& p, const Histogram& q) {
  if (p.edges != q.edges) throw BinningError("histograms have mismatched bin edges");
}

/// Hellinger distance, in [0,1].
inline double hellinger(const Histogram& p, const Histogram& q) {
  require_same_edges(p, q);
  double s = 0.0;
  for (std::size_t i = 0; i < p.bins(); ++i) {
    const double d = std::sqrt(p.masses[i]) - std::sqrt(q.masses[i]);
    s += d * d;
  }
  return std::min(1.0, std::sqrt(s / 2.0));
}

/// Jensen-Shannon distance with base-2 logarithms, in [0,1].
inline double jensen_shannon(const Histogram& p, const Histogram& q) {
  require_same_edges(p, q);
  double js = 0.0;
  for (std::size_t i = 0; i < p.bins(); ++i) {
    const double m = 0.5 * (p.masses[i] + q.masses[i]);
    if (p.masses[i] > 0.0) js += 0.5 * p.masses[i] * std::log2(p.masses[i] / m);
    if (q.masses[i] > 0.0) js += 0.5 * q.masses[i] * std::log2(q.masses[i] / m);
  }
  return std::clamp(std::sqrt(std::max(0.0, js)), 0.0, 1.0);
}

inline double hellinger(std::span<const double> a, std::span<const double> b) {
  const auto edges = shared_edges(a, b);
  return hellinger(bin_samples(a, edges), bin_samples(b, edges));
}

inline double jensen_shannon(std::span<const double> a, std::span<const double> b) {
  const auto edges = shared_edges(a, b);
  return jensen_shannon(bin_samples(a, edges), bin_samples(b, edges));
}

/// 1-D earth mover's distance between empirical distributions:
/// integral of |F_a(x) - F_b(x)| dx.
inline double wasserstein1(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw EmptyInput("Wasserstein distance needs non-empty samples");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  for (double v : x)
    if (!std::isfinite(v)) throw DomainError("samples must be finite");
  for (double v : y)
    if (!std::isfinite(v)) throw DomainError("samples must be finite");
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());

  if (x.size() == y.size()) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += std::abs(x[i] - y[i]);
    return s / static_cast<double>(x.size());
  }

  const double nx = static_cast<double>(x.size()), ny = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double prev = std::min(x.front(), y.front());
  double total = 0.0;
  while (i < x.size() || j < y.size()) {
    const double next = j >= y.size() || (i < x.size() && x[i] <= y[j]) ? x[i] : y[j];
    total += std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny) * (next - prev);
    while (i < x.size() && x[i] == next) ++i;
    while (j < y.size() && y[j] == next) ++j;
    prev = next;
  }
  return total;
}

enum class Metric { hellinger, jsd, wasserstein1 };

inline std::string to_string(Metric m) {
  switch (m) {
    case Metric::hellinger: return "hellinger";
    case Metric::jsd: return "jsd";
    case Metric::wasserstein1: return "wasserstein1";
  }
  return "?";
}

inline const char* kMetricNames = "hellinger, jsd, wasserstein1";

inline std::optional<Metric> parse_metric(std::string_view s) {
  if (s == "hellinger") return Metric::hellinger;
  if (s == "jsd" || s == "jensen-shannon") return Metric::jsd;
  if (s == "wasserstein1" || s == "wasserstein") return Metric::wasserstein1;
  return std::nullopt;
}

}  // namespace vvuq::vvp
