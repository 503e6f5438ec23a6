#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace vvuq::driver {

/// Inputs of the epidemic toy model, with their admissible ranges.
struct ToyInput {
  const char* name;
  double fallback;
  double lo;
  double hi;
};

inline constexpr std::array<ToyInput, 6> kToyInputs{{
    {"infection_rate", 0.07, 0.0035, 0.14},
    {"mortality_period", 8.0, 4.0, 16.0},
    {"recovery_period", 8.0, 4.0, 16.0},
    {"mild_recovery_period", 8.05, 4.5, 12.5},
    {"incubation_period", 3.0, 2.0, 6.0},
    {"period_to_hospitalisation", 12.0, 8.0, 16.0},
}};

struct ToyParams {
  double infection_rate = 0.07;
  double mortality_period = 8.0;
  double recovery_period = 8.0;
  double mild_recovery_period = 8.05;
  double incubation_period = 3.0;
  double period_to_hospitalisation = 12.0;
};

enum class ToyVariant { epidemic, additive };

struct ToyOptions {
  int horizon = 180;       // days; the series has one value per day
  std::uint64_t seed = 0;
  double noise = 0.0;      // log-normal spread of daily new deaths; 0 is deterministic
  ToyVariant variant = ToyVariant::epidemic;
};

/// Reads parameters from a JSON object. Missing names take the defaults;
/// values outside the ranges are clamped and reported in `warnings`.
ToyParams toy_params_from_json(const nlohmann::json& j, std::vector<std::string>* warnings = nullptr);

/// Cumulative deaths at the end of days 1..horizon.
///
/// epidemic: S -> E -> {I_mild, I_severe}; mild cases recover, severe ones
/// are hospitalised and then either die or recover. Force of infection is
/// infection_rate * contacts * S * (I_mild + I_severe), integrated by
/// forward Euler with ten sub-steps per day.
///
/// additive: a sum of one-parameter terms times t, for checking Sobol
/// indices against a model with no interactions.
std::vector<double> toy_model(const ToyParams& p, const ToyOptions& opts = {});

/// "t,dead" CSV for a series from toy_model.
std::string toy_csv(const std::vector<double>& dead);

}  // namespace vvuq::driver
