#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "vvuq/core/errors.hpp"
#include "vvuq/core/numeric_format.hpp"
#include "vvuq/core/rng.hpp"

namespace vvuq::analysis {

struct MeanStat {};
struct VarianceStat {};
struct QuantileStat {
  double q = 0.5;
};
using Statistic = std::variant<MeanStat, VarianceStat, QuantileStat>;

inline std::string statistic_name(const Statistic& s) {
  if (std::holds_alternative<MeanStat>(s)) return "mean";
  if (std::holds_alternative<VarianceStat>(s)) return "variance";
  return "quantile(" + format_double(std::get<QuantileStat>(s).q) + ")";
}

struct BootstrapCI {
  std::string statistic;
  double estimate = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  std::size_t replicates = 0;
  double alpha = 0.05;
  std::uint64_t seed = 0;
};

/// Linear-interpolation (type 7) quantile of sorted data.
inline double sorted_quantile(std::span<const double> sorted, double q) {
  if (sorted.size() == 1) return sorted.front();
  const double h = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline double evaluate_statistic(const Statistic& stat, std::vector<double>& data) {
  const double n = static_cast<double>(data.size());
  if (std::holds_alternative<MeanStat>(stat)) {
    double s = 0.0;
    for (double x : data) s += x;
    return s / n;
  }
  if (std::holds_alternative<VarianceStat>(stat)) {
    if (data.size() < 2) return 0.0;
    double mean = 0.0;
    for (double x : data) mean += x;
    mean /= n;
    double ss = 0.0;
    for (double x : data) ss += (x - mean) * (x - mean);
    return ss / (n - 1.0);
  }
  std::sort(data.begin(), data.end());
  return sorted_quantile(data, std::get<QuantileStat>(stat).q);
}

/// Percentile bootstrap interval at confidence 1-alpha from B resamples.
inline BootstrapCI bootstrap(std::span<const double> samples, const Statistic& stat,
                             std::size_t replicates, double alpha, std::uint64_t seed) {
  if (samples.empty()) throw EmptyInput("bootstrap needs at least one sample");
  if (replicates < 100) throw DomainError("bootstrap needs at least 100 replicates");
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0,1)");
  if (const auto* q = std::get_if<QuantileStat>(&stat); q && !(q->q >= 0.0 && q->q <= 1.0))
    throw DomainError("quantile level must lie in [0,1]");

  std::vector<double> data(samples.begin(), samples.end());
  BootstrapCI ci;
  ci.statistic = statistic_name(stat);
  ci.estimate = evaluate_statistic(stat, data);
  ci.replicates = replicates;
  ci.alpha = alpha;
  ci.seed = seed;

  CounterRng rng(seed);
  std::vector<double> reps(replicates);
  std::vector<double> resample(samples.size());
  for (auto& r : reps) {
    for (auto& x : resample) x = samples[static_cast<std::size_t>(rng.below(samples.size()))];
    r = evaluate_statistic(stat, resample);
  }
  std::sort(reps.begin(), reps.end());
  ci.lower = sorted_quantile(reps, alpha / 2.0);
  ci.upper = sorted_quantile(reps, 1.0 - alpha / 2.0);
  return ci;
}

}  // namespace vvuq::analysis
