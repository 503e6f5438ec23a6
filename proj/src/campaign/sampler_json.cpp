#include "vvuq/campaign/sampler_json.hpp"

#include "vvuq/core/errors.hpp"

namespace vvuq::campaign {

using nlohmann::json;
using namespace vvuq::sampling;

json to_json(const SamplerSpec& spec) {
  return std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, McSpec>) return {{"type", "mc"}, {"n", s.n}, {"seed", s.seed}};
        else if constexpr (std::is_same_v<T, HaltonSpec>) return {{"type", "halton"}, {"n", s.n}, {"skip", s.skip}};
        else if constexpr (std::is_same_v<T, ScSpec>)
          return {{"type", "sc"}, {"level", s.level}, {"growth", to_string(s.growth)}, {"sparse", s.sparse}};
        else return {{"type", "pce"}, {"order", s.order}};
      },
      spec);
}

namespace {

template <class T>
T field(const json& j, const char* key, const std::string& type) {
  if (!j.contains(key)) throw SamplerError(type + " sampler needs '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw SamplerError(type + " sampler field '" + key + "' has the wrong type");
  }
}

std::size_t count(const json& j, const char* key, const std::string& type) {
  const auto& v = j.contains(key) ? j.at(key) : json();
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw SamplerError(type + " sampler field '" + key + "' must be a non-negative integer");
  return v.get<std::size_t>();
}

}  // namespace

SamplerSpec sampler_from_json(const json& j) {
  if (!j.is_object() || !j.contains("type") || !j.at("type").is_string())
    throw SamplerError("sampler description needs a string 'type'");
  const auto type = j.at("type").get<std::string>();
  SamplerSpec spec;
  if (type == "mc") {
    spec = McSpec{count(j, "n", type), field<std::uint64_t>(j, "seed", type)};
  } else if (type == "halton") {
    spec = HaltonSpec{count(j, "n", type), j.contains("skip") ? count(j, "skip", type) : 0};
  } else if (type == "sc") {
    ScSpec s;
    s.level = static_cast<int>(count(j, "level", type));
    const auto g = j.value("growth", std::string("cc"));
    if (g == "cc" || g == "clenshaw-curtis") s.growth = Growth::clenshaw_curtis;
    else if (g == "linear") s.growth = Growth::linear;
    else throw SamplerError("unknown growth rule '" + g + "' (cc, linear)");
    s.sparse = j.value("sparse", false);
    spec = s;
  } else if (type == "pce") {
    spec = PceSpec{static_cast<int>(count(j, "order", type))};
  } else {
    throw SamplerError("unknown sampler type '" + type + "' (mc, halton, sc, pce)");
  }
  validate_spec(spec);
  return spec;
}

}  // namespace vvuq::campaign
