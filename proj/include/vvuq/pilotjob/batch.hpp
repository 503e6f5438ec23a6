#pragma once

#include <filesystem>
#include <vector>

#include <nlohmann/json.hpp>

#include "vvuq/pilotjob/scheduler.hpp"

namespace vvuq::pilotjob {

struct Batch {
  Allocation allocation;
  std::vector<JobSpec> jobs;
};

/// {allocation:{nodes:[{name, cores}], mode}, jobs:[...]}. Throws ParseError,
/// including for duplicate job names.
Batch batch_from_json(const nlohmann::json& doc);
Batch load_batch(const std::filesystem::path& file);

/// Runs a batch to completion under a wall-clock manager rooted at `workdir`.
SchedulerReport run_batch(const Batch& batch, const std::filesystem::path& workdir);

}  // namespace vvuq::pilotjob
