#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vvuq/campaign/config.hpp"
#include "vvuq/campaign/decoder.hpp"
#include "vvuq/campaign/status.hpp"
#include "vvuq/sampling/sampler.hpp"

namespace vvuq::campaign {

inline constexpr int kStoreSchemaVersion = 1;
inline constexpr const char* kStoreFile = "campaign.db";

struct StageInfo {
  int stage_id = 0;
  sampling::SamplerSpec sampler;
  nlohmann::json sampler_json;
  std::string rng;  // empty for deterministic samplers
  std::uint64_t seed = 0;
  std::size_t sample_count = 0;
  std::int64_t first_run = 0;
};

struct RunRecord {
  std::int64_t run_id = 0;
  int stage_id = 0;
  std::vector<double> params;  // in parameter order
  std::optional<double> weight;
  RunStatus status = RunStatus::NEW;
  std::string run_dir;  // relative to the workdir
  int attempts = 0;
  std::optional<int> exit_code;
};

struct ResumeSummary {
  std::size_t collated = 0;
  std::size_t completed = 0;  // finished, awaiting collation
  std::size_t retry = 0;      // FAILED runs reset to ENCODED
  std::size_t pending = 0;    // NEW or ENCODED before the reset
  std::size_t submitted = 0;  // still SUBMITTED (not reconciled)
};

std::string run_dir_name(std::int64_t run_id);

/// Campaign store: one SQLite file in write-ahead-log mode. Writes are
/// serialized through immediate transactions; each public mutator is one
/// transaction.
class Store {
 public:
  static Store create(const std::filesystem::path& workdir, const CampaignConfig& cfg);
  /// Opens an existing store and checks its invariants (StoreCorrupt).
  static Store open(const std::filesystem::path& workdir);

  Store(Store&&) noexcept;
  Store& operator=(Store&&) noexcept;
  ~Store();

  const std::filesystem::path& workdir() const;
  const CampaignConfig& config() const;
  const std::vector<ParameterDef>& parameters() const { return config().parameters; }
  std::string created_at() const;

  int add_stage(const sampling::SamplerSpec& spec, std::size_t cap = sampling::kDefaultPointCap);
  std::vector<StageInfo> stages() const;
  StageInfo stage(int stage_id) const;

  std::int64_t run_count() const;
  RunRecord run(std::int64_t run_id) const;
  std::vector<RunRecord> runs(std::optional<int> stage_id = std::nullopt) const;
  std::vector<RunRecord> runs_with_status(RunStatus s) const;
  std::map<RunStatus, std::size_t> status_counts(std::optional<int> stage_id = std::nullopt) const;
  std::filesystem::path run_path(const RunRecord& r) const { return workdir() / r.run_dir; }

  /// Moves a run along one edge of the lifecycle (TransitionError otherwise).
  /// FAILED->ENCODED increments attempts.
  void transition(std::int64_t run_id, RunStatus to, std::optional<int> exit_code = std::nullopt);

  /// Renders the template into the run directory; NEW/FAILED -> ENCODED.
  /// Re-encoding an ENCODED run rewrites the input without a transition.
  std::filesystem::path encode(std::int64_t run_id);
  /// Parses the run's output and stores its QoIs; COMPLETED -> COLLATED.
  DecodedOutput decode(std::int64_t run_id);

  /// Resolves SUBMITTED runs left by a dead driver using the run-directory
  /// markers. Returns the number of runs resolved.
  std::size_t reconcile_submitted();
  /// Partition by status, then FAILED -> ENCODED for every failed run.
  ResumeSummary resume();

  std::vector<std::string> qoi_names() const;
  std::vector<double> qoi_index(const std::string& qoi) const;
  std::map<std::int64_t, std::vector<double>> qoi_values(const std::string& qoi) const;
  std::optional<std::vector<double>> qoi_value(std::int64_t run_id, const std::string& qoi) const;

  void record_scores(const std::string& scorer, const std::map<std::int64_t, double>& scores);
  std::map<std::int64_t, double> scores(const std::string& scorer) const;

  /// Throws StoreCorrupt if any structural invariant fails.
  void verify() const;

  /// Canonical text dump of one stage's rows (stage row, runs' immutable
  /// columns, parameters), for byte comparison.
  std::string dump_stage(int stage_id) const;

 private:
  struct Impl;
  explicit Store(std::unique_ptr<Impl> impl);
  std::unique_ptr<Impl> impl_;
};

}  // namespace vvuq::campaign
