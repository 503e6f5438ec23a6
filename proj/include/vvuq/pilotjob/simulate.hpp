#pragma once

#include <string>
#include <vector>

#include "vvuq/pilotjob/scheduler.hpp"

namespace vvuq::pilotjob {

struct SimulationOptions {
  double dispatch_latency = 0.0;  // added to every task's declared duration
};

struct DispatchEvent {
  double time = 0.0;
  std::string job;
  int iteration = 0;
  Placement placement;
  friend bool operator==(const DispatchEvent&, const DispatchEvent&) = default;
};

struct SimulationResult {
  SchedulerReport report;
  std::vector<DispatchEvent> trace;
};

/// Runs the scheduler against declared durations in simulated time. Every
/// job needs a duration; all tasks succeed. Jobs are submitted at time 0.
SimulationResult simulate(const Allocation& allocation, std::vector<JobSpec> jobs,
                          const SimulationOptions& opts = {});

}  // namespace vvuq::pilotjob
