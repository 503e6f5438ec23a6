#include "vvuq/pilotjob/simulate.hpp"

#include <queue>
#include <tuple>

#include "vvuq/core/errors.hpp"

namespace vvuq::pilotjob {

SimulationResult simulate(const Allocation& allocation, std::vector<JobSpec> jobs, const SimulationOptions& opts) {
  for (const auto& j : jobs)
    if (!j.duration) throw ValidationError("job '" + j.name + "' has no declared duration");
  Allocation alloc = allocation;
  alloc.mode = AllocationMode::virtual_;
  Scheduler sched(alloc);
  sched.submit(std::move(jobs), 0.0);

  // (end time, sequence, job, iteration); sequence breaks ties in dispatch order
  using Ev = std::tuple<double, std::uint64_t, std::size_t, int>;
  std::priority_queue<Ev, std::vector<Ev>, std::greater<>> events;
  std::uint64_t seq = 0;
  SimulationResult out;
  double now = 0.0;
  for (;;) {
    for (auto& d : sched.schedule(now)) {
      const auto& j = sched.job(d.task.job);
      out.trace.push_back(DispatchEvent{now, j.spec.name, d.task.iteration, d.placement});
      events.emplace(now + *j.spec.duration + opts.dispatch_latency, seq++, d.task.job, d.task.iteration);
    }
    if (events.empty()) break;
    now = std::get<0>(events.top());
    // finish everything ending at this instant before scheduling again
    while (!events.empty() && std::get<0>(events.top()) == now) {
      const auto [t, s, job, it] = events.top();
      events.pop();
      sched.task_finished(TaskRef{job, it}, 0, now);
    }
  }
  out.report = sched.report();
  return out;
}

}  // namespace vvuq::pilotjob
