// Epidemic toy simulator used by the covid demo.
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "cli_common.hpp"
#include "vvuq/core/process.hpp"
#include "vvuq/driver/toy_model.hpp"

namespace fs = std::filesystem;
using namespace vvuq;

int main(int argc, char** argv) {
  CLI::App app{"Epidemic toy model: cumulative deaths per day as CSV (t,dead)"};
  std::string input = "params.json", output = "output.csv", variant = "epidemic", sentinel_dir;
  driver::ToyOptions opts;
  app.add_option("--input", input, "JSON object of parameter values")->capture_default_str();
  app.add_option("--output", output, "CSV file to write")->capture_default_str();
  app.add_option("--horizon", opts.horizon, "number of days")->capture_default_str()->check(CLI::NonNegativeNumber);
  app.add_option("--seed", opts.seed, "noise seed")->capture_default_str();
  app.add_option("--noise", opts.noise, "log-normal spread of daily deaths")->capture_default_str();
  app.add_option("--variant", variant, "epidemic or additive")
      ->capture_default_str()
      ->check(CLI::IsMember({"epidemic", "additive"}));
  app.add_option("--sentinel-dir", sentinel_dir,
                 "append a line to <dir>/<name of the working directory> after a successful run");
  CLI11_PARSE(app, argc, argv);

  return cli::guarded("toy-model", [&] {
    std::ifstream in(input);
    if (!in) throw IoError("cannot read " + input);
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("malformed input " + input + ": " + e.what());
    }
    std::vector<std::string> warnings;
    const auto params = driver::toy_params_from_json(doc, &warnings);
    for (const auto& w : warnings) std::fprintf(stderr, "toy-model: warning: %s\n", w.c_str());
    opts.variant = variant == "additive" ? driver::ToyVariant::additive : driver::ToyVariant::epidemic;
    write_file_atomic(output, driver::toy_csv(driver::toy_model(params, opts)));
    if (!sentinel_dir.empty()) {
      fs::create_directories(sentinel_dir);
      std::ofstream(fs::path(sentinel_dir) / fs::current_path().filename(), std::ios::app) << "done\n";
    }
    return 0;
  });
}
