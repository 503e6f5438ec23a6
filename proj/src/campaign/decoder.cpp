#include "vvuq/campaign/decoder.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "vvuq/core/errors.hpp"
#include "vvuq/core/numeric_format.hpp"

namespace vvuq::campaign {

namespace fs = std::filesystem;

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      auto cell = trim(line.substr(start, i - start));
      if (cell.size() >= 2 && cell.front() == '"' && cell.back() == '"') cell = cell.substr(1, cell.size() - 2);
      out.push_back(cell);
      start = i + 1;
    }
  }
  return out;
}

struct Columns {
  std::vector<std::string> names;  // index column first if any, then QoIs
};

Columns wanted(const DecoderSpec& spec) {
  Columns c;
  if (spec.index_column) c.names.push_back(*spec.index_column);
  for (const auto& q : spec.qoi_columns) c.names.push_back(q);
  return c;
}

void finish(DecodedOutput& out, const DecoderSpec& spec, std::vector<std::vector<double>>& cols,
            const fs::path& file) {
  std::size_t k = 0;
  if (spec.index_column) {
    out.index = std::move(cols[k++]);
    for (std::size_t i = 1; i < out.index.size(); ++i)
      if (!(out.index[i] > out.index[i - 1]))
        throw DecodeError(file.string() + ": index column '" + *spec.index_column +
                          "' is not strictly increasing at row " + std::to_string(i + 1));
  }
  for (const auto& q : spec.qoi_columns) out.qois[q] = std::move(cols[k++]);
  if (!spec.index_column) {
    const std::size_t n = out.qois.begin()->second.size();
    out.index.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.index[i] = static_cast<double>(i);
  }
}

DecodedOutput decode_csv(std::ifstream& in, const DecoderSpec& spec, const fs::path& file) {
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string_view> header;
  std::string header_line;
  while (std::getline(in, header_line)) {
    ++lineno;
    if (!trim(header_line).empty()) break;
  }
  if (trim(header_line).empty()) throw DecodeError(file.string() + ": empty output file");
  header = split_csv(header_line);

  const auto want = wanted(spec);
  std::vector<std::size_t> pos;
  for (const auto& name : want.names) {
    std::size_t p = header.size();
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) p = i;
    if (p == header.size()) throw DecodeError(file.string() + ": missing column '" + name + "'");
    pos.push_back(p);
  }

  std::vector<std::vector<double>> cols(want.names.size());
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split_csv(line);
    for (std::size_t k = 0; k < pos.size(); ++k) {
      if (pos[k] >= cells.size())
        throw DecodeError(file.string() + ":" + std::to_string(lineno) + ": row is missing column '" +
                          want.names[k] + "'");
      const auto v = parse_double(cells[pos[k]]);
      if (!v)
        throw DecodeError(file.string() + ":" + std::to_string(lineno) + ": unparsable value '" +
                          std::string(cells[pos[k]]) + "' in column '" + want.names[k] + "'");
      cols[k].push_back(*v);
    }
  }
  DecodedOutput out;
  finish(out, spec, cols, file);
  return out;
}

DecodedOutput decode_json_lines(std::ifstream& in, const DecoderSpec& spec, const fs::path& file) {
  const auto want = wanted(spec);
  std::vector<std::vector<double>> cols(want.names.size());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error&) {
      throw DecodeError(file.string() + ":" + std::to_string(lineno) + ": not a JSON object");
    }
    if (!obj.is_object()) throw DecodeError(file.string() + ":" + std::to_string(lineno) + ": not a JSON object");
    for (std::size_t k = 0; k < want.names.size(); ++k) {
      const auto it = obj.find(want.names[k]);
      if (it == obj.end())
        throw DecodeError(file.string() + ":" + std::to_string(lineno) + ": missing field '" + want.names[k] + "'");
      if (!it->is_number())
        throw DecodeError(file.string() + ":" + std::to_string(lineno) + ": field '" + want.names[k] +
                          "' is not a number");
      cols[k].push_back(it->get<double>());
    }
  }
  DecodedOutput out;
  finish(out, spec, cols, file);
  return out;
}

}  // namespace

DecodedOutput decode_output(const fs::path& file, const DecoderSpec& spec) {
  std::ifstream in(file);
  if (!in) throw DecodeError("output file not found: " + file.string());
  DecodedOutput out = spec.format == OutputFormat::csv ? decode_csv(in, spec, file) : decode_json_lines(in, spec, file);
  if (out.index.empty()) throw DecodeError(file.string() + ": output has no data rows");
  return out;
}

}  // namespace vvuq::campaign
