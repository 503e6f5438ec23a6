#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vvuq/core/parameter.hpp"

namespace vvuq::campaign {

inline constexpr int kConfigSchemaVersion = 1;

enum class OutputFormat { csv, json_lines };

struct DecoderSpec {
  std::string output;  // relative to the run directory
  OutputFormat format = OutputFormat::csv;
  std::vector<std::string> qoi_columns;
  std::optional<std::string> index_column;
};

struct AppSpec {
  std::filesystem::path template_path;
  std::string template_text;
  std::string target;  // rendered file name inside the run directory
  char delimiter = '$';
  std::vector<std::string> command;
  DecoderSpec decoder;
};

struct CampaignConfig {
  std::string name;
  AppSpec app;
  std::vector<ParameterDef> parameters;
};

/// Parses and validates a campaign document. Relative template paths are
/// resolved against `base_dir`; the template is read and checked against
/// the declared parameters. Throws ConfigError or TemplateError.
CampaignConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);
CampaignConfig load_config(const std::filesystem::path& file);

nlohmann::json to_json(const DecoderSpec& d);
DecoderSpec decoder_from_json(const nlohmann::json& j);
nlohmann::json to_json(const sampling::Distribution1D& d);
sampling::Distribution1D distribution_from_json(const nlohmann::json& j, const std::string& where);

/// Normalised document including the template text; parse_config accepts it back.
nlohmann::json to_json(const CampaignConfig& cfg);

std::size_t parameter_index(const CampaignConfig& cfg, std::string_view name);

}  // namespace vvuq::campaign
