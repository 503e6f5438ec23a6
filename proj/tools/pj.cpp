// Pilot-job manager: socket service, client commands, batch and simulated runs.
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "cli_common.hpp"
#include "vvuq/pilotjob/batch.hpp"
#include "vvuq/pilotjob/manager.hpp"
#include "vvuq/pilotjob/service.hpp"
#include "vvuq/pilotjob/simulate.hpp"

namespace fs = std::filesystem;
using namespace vvuq;
using namespace vvuq::pilotjob;
using nlohmann::json;

namespace {

void print_summary(const SchedulerReport& r, const fs::path& file) {
  std::printf("makespan %.6g s, ideal %.6g s, overhead %.6g s", r.makespan, r.ideal, r.overhead);
  if (r.ideal > 0) std::printf(" (%.3g%%)", 100.0 * r.overhead / r.ideal);
  std::printf("\n");
  for (const auto& [k, v] : r.counts)
    if (v) std::printf("%-10s %zu\n", k.c_str(), v);
  if (!file.empty()) std::printf("report: %s\n", file.c_str());
}

Allocation allocation_for(const std::string& file, int cores, bool virtual_mode) {
  if (!file.empty()) {
    std::ifstream in(file);
    if (!in) throw ParseError("cannot read allocation " + file);
    try {
      return allocation_from_json(json::parse(in));
    } catch (const json::parse_error& e) {
      throw ParseError("malformed allocation " + file + ": " + e.what());
    }
  }
  Allocation a = local_allocation();
  if (cores > 0) a.nodes.front().cores = cores;
  if (virtual_mode) a.mode = AllocationMode::virtual_;
  return a;
}

int failed_exit(const SchedulerReport& r) {
  return r.counts.at("SUCCEEDED") == r.counts.at("FAILED") + r.counts.at("SUCCEEDED") + r.counts.at("CANCELED") +
                                         r.counts.at("OMITTED")
             ? cli::kOk
             : cli::kRunFailures;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pj: run many jobs inside one allocation"};
  app.require_subcommand(1);

  std::string workdir = ".", socket, report, allocation_file, batch_file;
  int cores = 0;
  bool virtual_mode = false;

  auto add_socket = [&](CLI::App* s) { s->add_option("--socket", socket, "manager socket (default <workdir>/pj.sock)"); };
  auto add_alloc = [&](CLI::App* s) {
    s->add_option("--allocation-cores", cores, "cores of a single-node allocation (default: detected)");
    s->add_option("--allocation", allocation_file, "allocation JSON {nodes:[{name, cores}], mode}");
    s->add_flag("--virtual", virtual_mode, "do not cap cores by the hardware");
  };

  auto* serve = app.add_subcommand("serve", "listen for requests until a finish request");
  serve->add_option("--workdir", workdir, "manager directory")->capture_default_str();
  add_socket(serve);
  add_alloc(serve);
  serve->add_option("--report", report, "report file (default <workdir>/pj-report.json)");

  auto* run = app.add_subcommand("run", "run a batch file to completion");
  run->add_option("batch", batch_file, "batch JSON {allocation, jobs}")->required();
  run->add_option("--workdir", workdir, "manager directory")->capture_default_str();
  run->add_option("--report", report, "report file (default <workdir>/pj-report.json)");

  auto* sim = app.add_subcommand("simulate", "run a batch file in simulated time using declared durations");
  sim->add_option("batch", batch_file, "batch JSON {allocation, jobs}")->required();
  double latency = 0.0;
  sim->add_option("--dispatch-latency", latency, "seconds added to every task")->capture_default_str();
  sim->add_option("--report", report, "report file");

  std::string job_file, name;
  int job_cores = 1, iterations = 1;
  std::vector<std::string> after, command;
  auto* submit = app.add_subcommand("submit", "submit jobs to a running manager");
  submit->add_option("--workdir", workdir, "manager directory")->capture_default_str();
  add_socket(submit);
  submit->add_option("--file", job_file, "JSON job spec or {jobs:[...]}");
  submit->add_option("--name", name, "job name");
  submit->add_option("--cores", job_cores, "cores")->capture_default_str();
  submit->add_option("--iterations", iterations, "iterations")->capture_default_str();
  submit->add_option("--after", after, "dependencies");
  submit->add_option("command", command, "command and arguments");

  auto* status = app.add_subcommand("status", "job table or one job");
  status->add_option("--workdir", workdir, "manager directory")->capture_default_str();
  add_socket(status);
  status->add_option("--name", name, "job name");

  auto* cancel = app.add_subcommand("cancel", "cancel a job");
  cancel->add_option("--workdir", workdir, "manager directory")->capture_default_str();
  add_socket(cancel);
  cancel->add_option("--name", name, "job name")->required();

  auto* resources = app.add_subcommand("resources", "allocation usage");
  resources->add_option("--workdir", workdir, "manager directory")->capture_default_str();
  add_socket(resources);

  auto* finish = app.add_subcommand("finish", "drain the manager and print its report");
  finish->add_option("--workdir", workdir, "manager directory")->capture_default_str();
  add_socket(finish);

  CLI11_PARSE(app, argc, argv);
  const fs::path sock = socket.empty() ? fs::path(workdir) / "pj.sock" : fs::path(socket);

  return cli::guarded("pj", [&]() -> int {
    if (*serve) {
      Manager m({allocation_for(allocation_file, cores, virtual_mode), workdir});
      Server server(m, sock);
      std::printf("listening on %s with %d cores\n", sock.c_str(), m.total_cores());
      std::fflush(stdout);
      server.serve();
      const auto r = server.report() ? *server.report() : m.finish();
      const fs::path out = report.empty() ? fs::path(workdir) / kReportFile : fs::path(report);
      write_report(r, out);
      print_summary(r, out);
      return cli::kOk;
    }
    if (*run) {
      const auto b = load_batch(batch_file);
      const auto r = run_batch(b, workdir);
      const fs::path out = report.empty() ? fs::path(workdir) / kReportFile : fs::path(report);
      write_report(r, out);
      print_summary(r, out);
      return failed_exit(r);
    }
    if (*sim) {
      const auto b = load_batch(batch_file);
      const auto res = simulate(b.allocation, b.jobs, SimulationOptions{latency});
      if (!report.empty()) write_report(res.report, report);
      print_summary(res.report, report);
      return cli::kOk;
    }
    Client c(sock);
    if (*submit) {
      json payload;
      if (!job_file.empty()) {
        std::ifstream in(job_file);
        if (!in) throw ParseError("cannot read " + job_file);
        payload = json::parse(in);
      } else {
        if (name.empty() || command.empty()) throw ParseError("submit needs --file, or --name and a command");
        JobSpec j;
        j.name = name;
        j.command = command;
        j.cores = job_cores;
        j.iterations = iterations;
        j.after = after;
        payload = to_json(j);
      }
      std::printf("%s\n", c.call("submit", payload).dump().c_str());
      return cli::kOk;
    }
    if (*status) {
      json payload = json::object();
      if (!name.empty()) payload["name"] = name;
      std::printf("%s\n", c.call("status", payload).dump(2).c_str());
      return cli::kOk;
    }
    if (*cancel) {
      c.call("cancel", {{"name", name}});
      std::printf("canceled %s\n", name.c_str());
      return cli::kOk;
    }
    if (*resources) {
      std::printf("%s\n", c.call("resources").dump(2).c_str());
      return cli::kOk;
    }
    if (*finish) {
      const auto r = c.call("finish");
      std::printf("makespan %.6g s, overhead %.6g s\n", r.at("makespan").get<double>(), r.at("overhead").get<double>());
      return cli::kOk;
    }
    return cli::kUsage;
  });
}
