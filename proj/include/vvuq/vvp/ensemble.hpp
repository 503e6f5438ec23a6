#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vvuq/campaign/store.hpp"
#include "vvuq/vvp/aggregate.hpp"

namespace vvuq::vvp {

/// Mean absolute relative error of `y` against `reference`. Points where the
/// reference is exactly zero are skipped; ScorerError if none remain or the
/// lengths differ.
double mare(std::span<const double> y, std::span<const double> reference);

struct ScorerSpec {
  enum class Kind { mare, command };
  Kind kind = Kind::mare;
  std::string qoi;                   // mare
  std::vector<double> reference;     // mare
  std::vector<std::string> command;  // command; the run directory is appended

  static ScorerSpec builtin_mare(std::string qoi, std::vector<double> reference);
  static ScorerSpec external(std::vector<std::string> command);
  /// Name the scores are stored under.
  std::string name() const;
};

/// Runs an external scorer on one run directory and parses the single real
/// it prints. Throws ScorerError naming the run.
double external_score(const std::vector<std::string>& command, const std::string& run_dir, std::int64_t run_id);

/// Scores every run of the selected stages (all stages when empty), records
/// the scores in the store and aggregates them. Every selected run must be
/// COLLATED (MissingRunError otherwise). Weighted means use `weights`, or
/// the runs' quadrature weights when `weights` is empty.
EnsembleScore ensemble_validate(campaign::Store& store, const ScorerSpec& scorer, Aggregator aggregator,
                                const std::vector<int>& stages = {},
                                const std::map<std::int64_t, double>& weights = {});

}  // namespace vvuq::vvp
