#include "vvuq/campaign/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "vvuq/campaign/template.hpp"
#include "vvuq/core/errors.hpp"

namespace vvuq::campaign {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key))
    throw ConfigError(where + ": missing required field '" + key + "'");
  return obj.at(key);
}

std::string require_string(const json& obj, const char* key, const std::string& where) {
  const auto& v = require(obj, key, where);
  if (!v.is_string() || v.get<std::string>().empty())
    throw ConfigError(where + "." + key + " must be a non-empty string");
  return v.get<std::string>();
}

double require_number(const json& v, const std::string& where) {
  if (!v.is_number()) throw ConfigError(where + " must be a number");
  return v.get<double>();
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("cannot read template file " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ParameterDef parse_parameter(const json& j, std::size_t i) {
  const std::string where = "parameters[" + std::to_string(i) + "]";
  ParameterDef p;
  p.name = require_string(j, "name", where);
  if (!is_valid_identifier(p.name))
    throw ConfigError(where + ": '" + p.name + "' is not a valid identifier ([A-Za-z_][A-Za-z0-9_]*)");
  const std::string w = "parameter '" + p.name + "'";
  const std::string kind = j.value("kind", std::string("real"));
  if (kind == "real") p.kind = ParamKind::real;
  else if (kind == "integer") p.kind = ParamKind::integer;
  else throw ConfigError(w + ": kind must be 'real' or 'integer', got '" + kind + "'");
  p.distribution = distribution_from_json(require(j, "distribution", w), w);
  if (j.contains("default")) p.default_value = require_number(j.at("default"), w + ".default");
  else p.default_value = p.distribution.mean();
  if (!p.distribution.in_support(p.default_value))
    throw ConfigError(w + ": default " + format_double(p.default_value) +
                      " lies outside the distribution's support");
  if (p.kind == ParamKind::integer && p.default_value != std::round(p.default_value))
    throw ConfigError(w + ": integer parameter needs an integral default");
  return p;
}

}  // namespace

json to_json(const sampling::Distribution1D& d) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, sampling::Uniform>) return {{"type", "uniform"}, {"args", {v.lo, v.hi}}};
        else if constexpr (std::is_same_v<T, sampling::Normal>)
          return {{"type", "normal"}, {"args", {v.mu, v.sigma}}};
        else return {{"type", "constant"}, {"args", {v.value}}};
      },
      d.variant());
}

sampling::Distribution1D distribution_from_json(const json& j, const std::string& where) {
  const std::string type = require_string(j, "type", where + ".distribution");
  const auto& args = require(j, "args", where + ".distribution");
  if (!args.is_array()) throw ConfigError(where + ": distribution args must be an array");
  std::vector<double> a;
  for (const auto& v : args) a.push_back(require_number(v, where + ": distribution argument"));
  auto arity = [&](std::size_t n) {
    if (a.size() != n)
      throw ConfigError(where + ": " + type + " distribution takes " + std::to_string(n) + " argument(s), got " +
                        std::to_string(a.size()));
  };
  try {
    if (type == "uniform") {
      arity(2);
      return sampling::Distribution1D::uniform(a[0], a[1]);
    }
    if (type == "normal") {
      arity(2);
      return sampling::Distribution1D::normal(a[0], a[1]);
    }
    if (type == "constant") {
      arity(1);
      return sampling::Distribution1D::constant(a[0]);
    }
  } catch (const ConfigError& e) {
    throw ConfigError(where + ": " + e.what());
  }
  throw ConfigError(where + ": unknown distribution type '" + type + "' (uniform, normal, constant)");
}

json to_json(const DecoderSpec& d) {
  json j{{"output", d.output},
         {"format", d.format == OutputFormat::csv ? "csv" : "json-lines"},
         {"qoi_columns", d.qoi_columns}};
  if (d.index_column) j["index_column"] = *d.index_column;
  return j;
}

DecoderSpec decoder_from_json(const json& j) {
  DecoderSpec d;
  d.output = require_string(j, "output", "app.decoder");
  if (fs::path(d.output).is_absolute())
    throw ConfigError("app.decoder.output must be relative to the run directory");
  const std::string fmt = j.value("format", std::string("csv"));
  if (fmt == "csv") d.format = OutputFormat::csv;
  else if (fmt == "json-lines") d.format = OutputFormat::json_lines;
  else throw ConfigError("app.decoder.format must be 'csv' or 'json-lines', got '" + fmt + "'");
  const auto& cols = require(j, "qoi_columns", "app.decoder");
  if (!cols.is_array() || cols.empty()) throw ConfigError("app.decoder.qoi_columns must be a non-empty array");
  std::set<std::string> seen;
  for (const auto& c : cols) {
    if (!c.is_string() || c.get<std::string>().empty())
      throw ConfigError("app.decoder.qoi_columns entries must be non-empty strings");
    if (!seen.insert(c.get<std::string>()).second)
      throw ConfigError("app.decoder.qoi_columns lists '" + c.get<std::string>() + "' twice");
    d.qoi_columns.push_back(c.get<std::string>());
  }
  if (j.contains("index_column") && !j.at("index_column").is_null()) {
    if (!j.at("index_column").is_string()) throw ConfigError("app.decoder.index_column must be a string");
    d.index_column = j.at("index_column").get<std::string>();
    if (seen.count(*d.index_column)) throw ConfigError("index column cannot also be a QoI column");
  }
  return d;
}

CampaignConfig parse_config(const json& doc, const fs::path& base_dir) {
  if (!doc.is_object()) throw ConfigError("campaign config must be a JSON object");
  if (doc.contains("schema_version")) {
    const auto& v = doc.at("schema_version");
    if (!v.is_number_integer() || v.get<int>() != kConfigSchemaVersion)
      throw ConfigError("unsupported config schema_version (expected " + std::to_string(kConfigSchemaVersion) + ")");
  }
  CampaignConfig cfg;
  cfg.name = require_string(doc, "name", "config");

  const auto& app = require(doc, "app", "config");
  const std::string tmpl = require_string(app, "template", "app");
  cfg.app.template_path = fs::path(tmpl).is_absolute() ? fs::path(tmpl) : base_dir / tmpl;
  if (app.contains("template_text")) {
    if (!app.at("template_text").is_string()) throw ConfigError("app.template_text must be a string");
    cfg.app.template_text = app.at("template_text").get<std::string>();
  } else {
    if (!fs::is_regular_file(cfg.app.template_path))
      throw ConfigError("template file not found: " + cfg.app.template_path.string());
    cfg.app.template_text = read_file(cfg.app.template_path);
  }
  cfg.app.target = app.value("target", cfg.app.template_path.filename().string());
  if (cfg.app.target.empty() || fs::path(cfg.app.target).is_absolute() ||
      fs::path(cfg.app.target).filename() != fs::path(cfg.app.target))
    throw ConfigError("app.target must be a plain file name");
  const std::string delim = app.value("delimiter", std::string("$"));
  if (delim.size() != 1 || is_identifier_char(delim[0]) || delim[0] == '\n')
    throw ConfigError("app.delimiter must be a single non-identifier character");
  cfg.app.delimiter = delim[0];

  const auto& cmd = require(app, "command", "app");
  if (cmd.is_string()) {
    cfg.app.command = {"/bin/sh", "-c", cmd.get<std::string>()};
  } else if (cmd.is_array() && !cmd.empty()) {
    for (const auto& c : cmd) {
      if (!c.is_string()) throw ConfigError("app.command entries must be strings");
      cfg.app.command.push_back(c.get<std::string>());
    }
  } else {
    throw ConfigError("app.command must be a string or a non-empty array");
  }
  cfg.app.decoder = decoder_from_json(require(app, "decoder", "app"));

  const auto& params = require(doc, "parameters", "config");
  if (!params.is_array()) throw ConfigError("parameters must be an array");
  if (params.empty()) throw ConfigError("campaign needs at least one parameter");
  std::set<std::string> names;
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = parse_parameter(params[i], i);
    if (!names.insert(p.name).second) throw ConfigError("duplicate parameter name '" + p.name + "'");
    cfg.parameters.push_back(std::move(p));
  }

  std::set<std::string> placeholders_found;
  try {
    placeholders_found = placeholders(cfg.app.template_text, cfg.app.delimiter);
  } catch (const EncodingError& e) {
    throw TemplateError(std::string("template: ") + e.what());
  }
  for (const auto& n : placeholders_found)
    if (!names.count(n)) throw TemplateError("template placeholder '" + n + "' names no declared parameter");
  return cfg;
}

CampaignConfig load_config(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config file " + file.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + file.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(doc, file.parent_path().empty() ? fs::path(".") : file.parent_path());
}

json to_json(const CampaignConfig& cfg) {
  json params = json::array();
  for (const auto& p : cfg.parameters)
    params.push_back({{"name", p.name},
                      {"kind", p.kind == ParamKind::real ? "real" : "integer"},
                      {"default", p.default_value},
                      {"distribution", to_json(p.distribution)}});
  return {{"schema_version", kConfigSchemaVersion},
          {"name", cfg.name},
          {"app",
           {{"template", cfg.app.template_path.string()},
            {"template_text", cfg.app.template_text},
            {"target", cfg.app.target},
            {"delimiter", std::string(1, cfg.app.delimiter)},
            {"command", cfg.app.command},
            {"decoder", to_json(cfg.app.decoder)}}},
          {"parameters", params}};
}

std::size_t parameter_index(const CampaignConfig& cfg, std::string_view name) {
  for (std::size_t i = 0; i < cfg.parameters.size(); ++i)
    if (cfg.parameters[i].name == name) return i;
  throw ConfigError("unknown parameter '" + std::string(name) + "'");
}

}  // namespace vvuq::campaign
