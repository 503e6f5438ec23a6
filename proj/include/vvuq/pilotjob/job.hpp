#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace vvuq::pilotjob {

struct Node {
  std::string name;
  int cores = 1;
};

enum class AllocationMode { local, virtual_ };

struct Allocation {
  std::vector<Node> nodes;
  AllocationMode mode = AllocationMode::local;

  int total_cores() const {
    int n = 0;
    for (const auto& node : nodes) n += node.cores;
    return n;
  }
};

inline constexpr int kLocalCoreMultiple = 4;

/// Hardware cores, or PJ_VIRTUAL_CORES when set.
int detected_cores();
/// Single-node local allocation sized by detected_cores().
Allocation local_allocation();
/// Throws ValidationError if the allocation is empty or, in local mode,
/// exceeds kLocalCoreMultiple times the detected cores.
void validate(const Allocation& a);

struct JobSpec {
  std::string name;
  std::vector<std::string> command;  // argv; a plain string is run through /bin/sh -c
  int cores = 1;
  std::vector<std::string> after;
  int iterations = 1;
  bool parallel_iterations = false;
  std::map<std::string, std::string> env;
  std::string workdir;  // empty: the manager's workdir
  std::string stdout_path;
  std::string stderr_path;
  std::optional<double> duration;  // declared runtime in seconds
};

enum class JobStatus { QUEUED, EXECUTING, SUCCEEDED, FAILED, CANCELED, OMITTED };

std::string to_string(JobStatus s);
inline bool is_terminal(JobStatus s) {
  return s == JobStatus::SUCCEEDED || s == JobStatus::FAILED || s == JobStatus::CANCELED || s == JobStatus::OMITTED;
}

nlohmann::json to_json(const JobSpec& j);
/// Throws ParseError for structurally malformed specs.
JobSpec job_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Allocation& a);
Allocation allocation_from_json(const nlohmann::json& j);

}  // namespace vvuq::pilotjob
