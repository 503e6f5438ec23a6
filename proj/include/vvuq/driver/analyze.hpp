#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vvuq/analysis/bootstrap.hpp"
#include "vvuq/campaign/store.hpp"

namespace vvuq::driver {

struct AnalyzeOptions {
  std::string qoi;
  std::vector<int> stages;  // empty: the last stage; several only for pooled MC stages
  bool allow_missing = false;  // MC only: skip runs that are not collated
  std::size_t replicates = 1000;
  double alpha = 0.05;
  std::uint64_t seed = 0;
};

struct AnalysisResult {
  std::string qoi;
  std::string method;  // "spectral" or "mc"
  std::vector<int> stages;
  std::vector<std::string> parameters;  // uncertain parameters, in order
  std::vector<double> time;
  std::vector<double> mean;
  std::vector<std::optional<double>> variance;
  std::vector<std::vector<std::optional<double>>> first;  // spectral: [parameter][time]
  std::vector<std::vector<std::optional<double>>> total;
  std::vector<analysis::BootstrapCI> mean_ci;  // mc: one per time point
  std::size_t runs_used = 0;
  std::vector<std::int64_t> runs_missing;

  nlohmann::json to_json() const;
  /// spectral: time,parameter,S_i,ST_i,mean,variance
  /// mc:       time,mean,variance,mean_lower,mean_upper
  std::string to_csv() const;
  /// Fixed-width first/total indices at the final time point (spectral), or
  /// the final moments (mc).
  std::string table() const;
};

/// Throws NotFound (unknown QoI, listing the available ones), ConfigError
/// (bad stage selection) or MissingRunError (listing run ids).
AnalysisResult analyze(const campaign::Store& store, const AnalyzeOptions& opts);

/// Text of an optional index: shortest round-trip decimal, or "undef".
std::string format_index(const std::optional<double>& v);

struct ReportFiles {
  std::filesystem::path json;
  std::filesystem::path csv;  // empty when no CSV was written
};

/// Writes <workdir>/reports/<stem>-<timestamp>.{json,csv} and copies them
/// to <stem>-latest.{json,csv}.
ReportFiles write_report_files(const std::filesystem::path& workdir, const std::string& stem,
                               const nlohmann::json& doc, const std::optional<std::string>& csv);

}  // namespace vvuq::driver
