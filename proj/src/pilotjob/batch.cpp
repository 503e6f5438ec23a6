#include "vvuq/pilotjob/batch.hpp"

#include <fstream>
#include <set>

#include "vvuq/core/errors.hpp"
#include "vvuq/pilotjob/manager.hpp"

namespace vvuq::pilotjob {

using nlohmann::json;

Batch batch_from_json(const json& doc) {
  if (!doc.is_object()) throw ParseError("batch file must hold a JSON object");
  Batch b;
  b.allocation = doc.contains("allocation") ? allocation_from_json(doc.at("allocation")) : local_allocation();
  if (doc.contains("jobs")) {
    if (!doc.at("jobs").is_array()) throw ParseError("'jobs' must be an array");
    std::set<std::string> seen;
    for (const auto& j : doc.at("jobs")) {
      auto spec = job_from_json(j);
      if (!seen.insert(spec.name).second) throw ParseError("duplicate job name '" + spec.name + "'");
      b.jobs.push_back(std::move(spec));
    }
  }
  return b;
}

Batch load_batch(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ParseError("cannot read batch file " + file.string());
  try {
    return batch_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ParseError("malformed batch file " + file.string() + ": " + e.what());
  }
}

SchedulerReport run_batch(const Batch& batch, const std::filesystem::path& workdir) {
  Manager m(ManagerOptions{batch.allocation, workdir});
  if (!batch.jobs.empty()) m.submit(batch.jobs);
  return m.finish();
}

}  // namespace vvuq::pilotjob
