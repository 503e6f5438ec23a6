#pragma once

#include <nlohmann/json.hpp>

#include "vvuq/sampling/sampler.hpp"

namespace vvuq::campaign {

nlohmann::json to_json(const sampling::SamplerSpec& spec);
sampling::SamplerSpec sampler_from_json(const nlohmann::json& j);

}  // namespace vvuq::campaign
