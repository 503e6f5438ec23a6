#include "vvuq/pilotjob/job.hpp"

#include <cstdlib>
#include <thread>

#include "vvuq/core/errors.hpp"

namespace vvuq::pilotjob {

using nlohmann::json;

int detected_cores() {
  if (const char* v = std::getenv("PJ_VIRTUAL_CORES"); v && *v) {
    char* end = nullptr;
    const long n = std::strtol(v, &end, 10);
    if (*end != '\0' || n < 1) throw ValidationError("PJ_VIRTUAL_CORES must be a positive integer");
    return static_cast<int>(n);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

Allocation local_allocation() { return Allocation{{Node{"localhost", detected_cores()}}, AllocationMode::local}; }

void validate(const Allocation& a) {
  if (a.nodes.empty()) throw ValidationError("allocation has no nodes");
  for (const auto& n : a.nodes)
    if (n.cores < 1) throw ValidationError("node '" + n.name + "' needs at least one core");
  if (a.mode == AllocationMode::local) {
    const int cap = kLocalCoreMultiple * detected_cores();
    if (a.total_cores() > cap)
      throw ValidationError("local allocation of " + std::to_string(a.total_cores()) + " cores exceeds " +
                            std::to_string(cap) + " (" + std::to_string(kLocalCoreMultiple) +
                            "x detected cores); set PJ_VIRTUAL_CORES or use a virtual allocation");
  }
}

std::string to_string(JobStatus s) {
  switch (s) {
    case JobStatus::QUEUED: return "QUEUED";
    case JobStatus::EXECUTING: return "EXECUTING";
    case JobStatus::SUCCEEDED: return "SUCCEEDED";
    case JobStatus::FAILED: return "FAILED";
    case JobStatus::CANCELED: return "CANCELED";
    case JobStatus::OMITTED: return "OMITTED";
  }
  return "?";
}

json to_json(const JobSpec& j) {
  json o{{"name", j.name}, {"command", j.command}, {"cores", j.cores}, {"after", j.after},
         {"iterations", j.iterations}};
  if (j.parallel_iterations) o["parallel_iterations"] = true;
  if (!j.env.empty()) o["env"] = j.env;
  if (!j.workdir.empty()) o["workdir"] = j.workdir;
  if (!j.stdout_path.empty()) o["stdout"] = j.stdout_path;
  if (!j.stderr_path.empty()) o["stderr"] = j.stderr_path;
  if (j.duration) o["duration"] = *j.duration;
  return o;
}

namespace {

template <class T>
T get(const json& o, const char* key, T fallback) {
  if (!o.contains(key) || o.at(key).is_null()) return fallback;
  try {
    return o.at(key).get<T>();
  } catch (const json::exception&) {
    throw ParseError(std::string("job field '") + key + "' has the wrong type");
  }
}

}  // namespace

JobSpec job_from_json(const json& o) {
  if (!o.is_object()) throw ParseError("job spec must be a JSON object");
  JobSpec j;
  j.name = get<std::string>(o, "name", "");
  if (!o.contains("command")) throw ParseError("job '" + j.name + "' has no command");
  const auto& cmd = o.at("command");
  if (cmd.is_string()) {
    j.command = {"/bin/sh", "-c", cmd.get<std::string>()};
  } else if (cmd.is_array()) {
    for (const auto& c : cmd) {
      if (!c.is_string()) throw ParseError("job '" + j.name + "': command entries must be strings");
      j.command.push_back(c.get<std::string>());
    }
  } else {
    throw ParseError("job '" + j.name + "': command must be a string or an array");
  }
  j.cores = get<int>(o, "cores", 1);
  j.after = get<std::vector<std::string>>(o, "after", {});
  j.iterations = get<int>(o, "iterations", 1);
  j.parallel_iterations = get<bool>(o, "parallel_iterations", false);
  j.env = get<std::map<std::string, std::string>>(o, "env", {});
  j.workdir = get<std::string>(o, "workdir", "");
  j.stdout_path = get<std::string>(o, "stdout", "");
  j.stderr_path = get<std::string>(o, "stderr", "");
  if (o.contains("duration") && !o.at("duration").is_null()) j.duration = get<double>(o, "duration", 0.0);
  return j;
}

json to_json(const Allocation& a) {
  json nodes = json::array();
  for (const auto& n : a.nodes) nodes.push_back({{"name", n.name}, {"cores", n.cores}});
  return {{"nodes", nodes}, {"mode", a.mode == AllocationMode::local ? "local" : "virtual"}};
}

Allocation allocation_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("allocation must be a JSON object");
  Allocation a;
  const std::string mode = get<std::string>(j, "mode", "local");
  if (mode == "local") a.mode = AllocationMode::local;
  else if (mode == "virtual") a.mode = AllocationMode::virtual_;
  else throw ParseError("allocation mode must be 'local' or 'virtual'");
  if (!j.contains("nodes")) return Allocation{local_allocation().nodes, a.mode};
  if (!j.at("nodes").is_array()) throw ParseError("allocation.nodes must be an array");
  for (const auto& n : j.at("nodes")) {
    if (!n.is_object()) throw ParseError("allocation node must be an object");
    a.nodes.push_back(Node{get<std::string>(n, "name", "node" + std::to_string(a.nodes.size())), get<int>(n, "cores", 1)});
  }
  return a;
}

}  // namespace vvuq::pilotjob
