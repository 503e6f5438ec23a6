#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "vvuq/campaign/config.hpp"

namespace vvuq::campaign {

struct DecodedOutput {
  std::vector<double> index;  // explicit index column, or 0..n-1
  std::map<std::string, std::vector<double>> qois;
};

/// Reads one run's output file. Throws DecodeError.
DecodedOutput decode_output(const std::filesystem::path& file, const DecoderSpec& spec);

}  // namespace vvuq::campaign
