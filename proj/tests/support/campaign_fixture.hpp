#pragma once

#include <nlohmann/json.hpp>

#include "tempdir.hpp"
#include "vvuq/campaign/config.hpp"

namespace vvuq::testing {

/// The six uncertain inputs of the epidemic demo with their uniform ranges.
inline nlohmann::json demo_parameters() {
  auto p = [](const char* name, double def, double lo, double hi) {
    return nlohmann::json{{"name", name}, {"kind", "real"}, {"default", def},
                          {"distribution", {{"type", "uniform"}, {"args", {lo, hi}}}}};
  };
  return nlohmann::json::array({p("infection_rate", 0.07, 0.0035, 0.14), p("mortality_period", 8.0, 4, 16),
                                p("recovery_period", 8.0, 4, 16), p("mild_recovery_period", 8.05, 4.5, 12.5),
                                p("incubation_period", 3.0, 2, 6), p("period_to_hospitalisation", 12.0, 8, 16)});
}

inline nlohmann::json uniform_param(const std::string& name, double lo, double hi) {
  return {{"name", name}, {"distribution", {{"type", "uniform"}, {"args", {lo, hi}}}}};
}

/// Campaign document whose template echoes every parameter into a CSV row,
/// so the decoded QoIs equal the inputs.
inline nlohmann::json echo_config(const TempDir& dir, const nlohmann::json& params) {
  std::string header, row;
  std::vector<std::string> cols;
  for (const auto& p : params) {
    const auto n = p.at("name").get<std::string>();
    header += (header.empty() ? "" : ",") + n;
    row += (row.empty() ? "$" : ",$") + n;
    cols.push_back(n);
  }
  write_text(dir / "echo.csv", header + "\n" + row + "\n");
  return {{"name", "echo"},
          {"app",
           {{"template", (dir / "echo.csv").string()},
            {"command", {"true"}},
            {"decoder", {{"output", "echo.csv"}, {"format", "csv"}, {"qoi_columns", cols}}}}},
          {"parameters", params}};
}

inline campaign::CampaignConfig parse(const nlohmann::json& doc, const TempDir& dir) {
  return campaign::parse_config(doc, dir.path());
}

}  // namespace vvuq::testing
