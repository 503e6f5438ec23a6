#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "vvuq/vvp/metrics.hpp"

namespace vvuq::vvp {

/// Reference distribution: raw samples or a histogram.
using Reference = std::variant<std::vector<double>, Histogram>;

struct SimilarityResult {
  Metric metric = Metric::hellinger;
  double distance = 0.0;
  std::map<std::string, double> per_qoi;
};

namespace detail {

// Ensemble binned on the reference edges; one empty-reference outer bin is
// added on each side that holds ensemble mass outside the reference range.
inline std::pair<Histogram, Histogram> align(std::span<const double> samples, const Histogram& ref) {
  std::vector<double> edges = ref.edges;
  std::vector<double> masses = ref.masses;
  const auto [mn, mx] = std::minmax_element(samples.begin(), samples.end());
  const double width = edges.back() - edges.front();
  if (*mn < edges.front()) {
    edges.insert(edges.begin(), std::min(*mn, edges.front() - width));
    masses.insert(masses.begin(), 0.0);
  }
  if (*mx > edges.back()) {
    edges.push_back(std::max(*mx, edges.back() + width));
    masses.push_back(0.0);
  }
  Histogram r = Histogram::make(edges, masses);
  Histogram e = bin_samples(samples, edges);
  return {std::move(e), std::move(r)};
}

// integral over [x0,x1] of |c - G(x)| with G linear from g0 to g1
inline double abs_linear_integral(double c, double g0, double g1, double x0, double x1) {
  const double len = x1 - x0;
  if (len <= 0.0) return 0.0;
  const double a = c - g0, b = c - g1;
  if (a * b >= 0.0) return 0.5 * (std::abs(a) + std::abs(b)) * len;
  const double t = a / (a - b);
  return 0.5 * (std::abs(a) * t + std::abs(b) * (1.0 - t)) * len;
}

// W1 between an empirical distribution and a histogram with uniform mass
// inside each bin.
inline double wasserstein1_hist(std::span<const double> samples, const Histogram& h) {
  std::vector<double> x(samples.begin(), samples.end());
  std::sort(x.begin(), x.end());
  std::vector<double> cdf(h.edges.size(), 0.0);
  for (std::size_t i = 0; i < h.bins(); ++i) cdf[i + 1] = cdf[i] + h.masses[i];
  auto G = [&](double v) {
    if (v <= h.edges.front()) return 0.0;
    if (v >= h.edges.back()) return 1.0;
    const auto k = static_cast<std::size_t>(std::upper_bound(h.edges.begin(), h.edges.end(), v) -
                                            h.edges.begin() - 1);
    const double frac = (v - h.edges[k]) / (h.edges[k + 1] - h.edges[k]);
    return cdf[k] + frac * h.masses[k];
  };
  std::vector<double> breaks(h.edges.begin(), h.edges.end());
  breaks.insert(breaks.end(), x.begin(), x.end());
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  const double n = static_cast<double>(x.size());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double lo = breaks[i], hi = breaks[i + 1];
    const double F = static_cast<double>(std::upper_bound(x.begin(), x.end(), lo) - x.begin()) / n;
    total += abs_linear_integral(F, G(lo), G(hi), lo, hi);
  }
  return total;
}

}  // namespace detail

/// Distance between an ensemble's empirical distribution and a reference.
inline double similarity(std::span<const double> ensemble, const Reference& reference, Metric metric) {
  if (ensemble.empty()) throw EmptyInput("ensemble has no values");
  if (const auto* samples = std::get_if<std::vector<double>>(&reference)) {
    if (samples->empty()) throw EmptyInput("reference has no samples");
    switch (metric) {
      case Metric::hellinger: return hellinger(ensemble, *samples);
      case Metric::jsd: return jensen_shannon(ensemble, *samples);
      case Metric::wasserstein1: return wasserstein1(ensemble, *samples);
    }
  }
  const auto& hist = std::get<Histogram>(reference);
  if (metric == Metric::wasserstein1) return detail::wasserstein1_hist(ensemble, hist);
  const auto [e, r] = detail::align(ensemble, hist);
  return metric == Metric::hellinger ? hellinger(e, r) : jensen_shannon(e, r);
}

/// Histogram of a normal distribution on `bins` equal bins over mu +- k sigma.
inline Histogram normal_histogram(double mu, double sigma, std::size_t bins, double k = 5.0) {
  std::vector<double> edges(bins + 1), masses(bins);
  for (std::size_t i = 0; i <= bins; ++i)
    edges[i] = mu - k * sigma + 2.0 * k * sigma * static_cast<double>(i) / static_cast<double>(bins);
  auto cdf = [&](double x) { return 0.5 * std::erfc(-(x - mu) / (sigma * std::sqrt(2.0))); };
  for (std::size_t i = 0; i < bins; ++i) masses[i] = cdf(edges[i + 1]) - cdf(edges[i]);
  return Histogram::make(std::move(edges), std::move(masses));
}

}  // namespace vvuq::vvp
