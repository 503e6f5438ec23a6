#include "vvuq/vvp/ensemble.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>

#include "vvuq/core/errors.hpp"
#include "vvuq/core/process.hpp"

namespace vvuq::vvp {

double mare(std::span<const double> y, std::span<const double> reference) {
  if (y.size() != reference.size())
    throw ScorerError("output has " + std::to_string(y.size()) + " points but the reference has " +
                      std::to_string(reference.size()));
  double s = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (reference[i] == 0.0) continue;
    s += std::abs(y[i] - reference[i]) / std::abs(reference[i]);
    ++n;
  }
  if (n == 0) throw ScorerError("reference has no non-zero points to compare against");
  return s / static_cast<double>(n);
}

ScorerSpec ScorerSpec::builtin_mare(std::string qoi, std::vector<double> reference) {
  ScorerSpec s;
  s.kind = Kind::mare;
  s.qoi = std::move(qoi);
  s.reference = std::move(reference);
  return s;
}

ScorerSpec ScorerSpec::external(std::vector<std::string> command) {
  if (command.empty()) throw ScorerError("external scorer command is empty");
  ScorerSpec s;
  s.kind = Kind::command;
  s.command = std::move(command);
  return s;
}

std::string ScorerSpec::name() const {
  if (kind == Kind::mare) return "mare:" + qoi;
  std::string n = "command:";
  for (std::size_t i = 0; i < command.size(); ++i) n += (i ? " " : "") + command[i];
  return n;
}

double external_score(const std::vector<std::string>& command, const std::string& run_dir, std::int64_t run_id) {
  auto argv = command;
  argv.push_back(run_dir);
  CaptureResult r;
  try {
    r = run_capture(argv);
  } catch (const Error& e) {
    throw ScorerError("run " + std::to_string(run_id) + ": " + e.what());
  }
  if (r.exit_code != 0)
    throw ScorerError("run " + std::to_string(run_id) + ": scorer exited with code " + std::to_string(r.exit_code));
  const auto first = r.out.find_first_not_of(" \t\r\n");
  const auto last = r.out.find_last_not_of(" \t\r\n");
  const std::string text = first == std::string::npos ? "" : r.out.substr(first, last - first + 1);
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || *end != '\0' || errno == ERANGE || !std::isfinite(v))
    throw ScorerError("run " + std::to_string(run_id) + ": scorer printed '" + text + "', expected one real");
  return v;
}

EnsembleScore ensemble_validate(campaign::Store& store, const ScorerSpec& scorer, Aggregator aggregator,
                                const std::vector<int>& stages, const std::map<std::int64_t, double>& weights) {
  std::vector<campaign::RunRecord> runs;
  if (stages.empty()) {
    runs = store.runs();
  } else {
    for (int s : stages) {
      auto part = store.runs(s);
      runs.insert(runs.end(), part.begin(), part.end());
    }
  }
  if (runs.empty()) throw EmptyInput("no runs to score");
  std::string missing;
  std::size_t n_missing = 0;
  for (const auto& r : runs)
    if (r.status != campaign::RunStatus::COLLATED) {
      if (n_missing++ < 20) missing += (missing.empty() ? "" : ", ") + std::to_string(r.run_id);
    }
  if (n_missing)
    throw MissingRunError(std::to_string(n_missing) + " run(s) not collated: " + missing + (n_missing > 20 ? ", ..." : ""));

  EnsembleScore out;
  out.aggregator = aggregator;
  std::map<std::int64_t, std::vector<double>> values;
  if (scorer.kind == ScorerSpec::Kind::mare) values = store.qoi_values(scorer.qoi);
  for (const auto& r : runs) {
    if (scorer.kind == ScorerSpec::Kind::mare) {
      auto it = values.find(r.run_id);
      if (it == values.end()) throw MissingRunError("run " + std::to_string(r.run_id) + " has no '" + scorer.qoi + "'");
      try {
        out.per_run[r.run_id] = mare(it->second, scorer.reference);
      } catch (const ScorerError& e) {
        throw ScorerError("run " + std::to_string(r.run_id) + ": " + e.what());
      }
    } else {
      out.per_run[r.run_id] = external_score(scorer.command, store.run_path(r).string(), r.run_id);
    }
  }
  std::map<std::int64_t, double> w = weights;
  if (aggregator == Aggregator::weighted_mean && w.empty())
    for (const auto& r : runs) {
      if (!r.weight) throw DomainError("run " + std::to_string(r.run_id) + " has no weight; pass weights explicitly");
      w[r.run_id] = *r.weight;
    }
  out.aggregate = aggregate(out.per_run, aggregator, w);
  store.record_scores(scorer.name(), out.per_run);
  return out;
}

}  // namespace vvuq::vvp
