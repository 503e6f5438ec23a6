#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vvuq/core/errors.hpp"

namespace vvuq::vvp {

enum class Aggregator { mean, weighted_mean, max };

inline std::string to_string(Aggregator a) {
  switch (a) {
    case Aggregator::mean: return "mean";
    case Aggregator::weighted_mean: return "weighted_mean";
    case Aggregator::max: return "max";
  }
  return "?";
}

inline std::optional<Aggregator> parse_aggregator(std::string_view s) {
  if (s == "mean") return Aggregator::mean;
  if (s == "weighted_mean") return Aggregator::weighted_mean;
  if (s == "max") return Aggregator::max;
  return std::nullopt;
}

struct EnsembleScore {
  std::map<std::int64_t, double> per_run;
  Aggregator aggregator = Aggregator::mean;
  double aggregate = 0.0;
};

/// Combines per-run scores. Weighted means need a non-negative weight for
/// every scored run; the weights are normalised by their sum.
inline double aggregate(const std::map<std::int64_t, double>& scores, Aggregator agg,
                        const std::map<std::int64_t, double>& weights = {}) {
  if (scores.empty()) throw EmptyInput("no per-run scores to aggregate");
  switch (agg) {
    case Aggregator::mean: {
      double s = 0.0;
      for (const auto& [id, v] : scores) s += v;
      return s / static_cast<double>(scores.size());
    }
    case Aggregator::max: {
      double m = -INFINITY;
      for (const auto& [id, v] : scores) m = std::max(m, v);
      return m;
    }
    case Aggregator::weighted_mean: {
      double s = 0.0, wsum = 0.0;
      for (const auto& [id, v] : scores) {
        auto it = weights.find(id);
        if (it == weights.end())
          throw DomainError("no weight for run " + std::to_string(id));
        if (!(it->second >= 0.0)) throw DomainError("weights must be non-negative");
        s += it->second * v;
        wsum += it->second;
      }
      if (!(wsum > 0.0)) throw DomainError("weights sum to zero");
      return s / wsum;
    }
  }
  return 0.0;
}

}  // namespace vvuq::vvp
