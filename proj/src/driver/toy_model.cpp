#include "vvuq/driver/toy_model.hpp"

#include <algorithm>
#include <cmath>

#include "vvuq/core/errors.hpp"
#include "vvuq/core/numeric_format.hpp"
#include "vvuq/core/rng.hpp"

namespace vvuq::driver {

namespace {

constexpr double kPopulation = 100000.0;
constexpr double kSeedInfected = 10.0;
constexpr double kContacts = 3.0;
constexpr double kMildFraction = 0.8;
constexpr double kHospitalDeathFraction = 0.25;
constexpr int kSubsteps = 10;

double* field(ToyParams& p, std::string_view name) {
  if (name == "infection_rate") return &p.infection_rate;
  if (name == "mortality_period") return &p.mortality_period;
  if (name == "recovery_period") return &p.recovery_period;
  if (name == "mild_recovery_period") return &p.mild_recovery_period;
  if (name == "incubation_period") return &p.incubation_period;
  if (name == "period_to_hospitalisation") return &p.period_to_hospitalisation;
  return nullptr;
}

std::vector<double> epidemic(const ToyParams& p, int horizon) {
  double s = 1.0 - kSeedInfected / kPopulation, e = kSeedInfected / kPopulation;
  double im = 0.0, is = 0.0, hd = 0.0, hr = 0.0, dead = 0.0;
  const double dt = 1.0 / kSubsteps;
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(horizon));
  for (int day = 0; day < horizon; ++day) {
    for (int k = 0; k < kSubsteps; ++k) {
      const double infect = std::min(s, p.infection_rate * kContacts * s * (im + is) * dt);
      const double onset = e * dt / p.incubation_period;
      const double mild_end = im * dt / p.mild_recovery_period;
      const double admit = is * dt / p.period_to_hospitalisation;
      const double die = hd * dt / p.mortality_period;
      const double discharge = hr * dt / p.recovery_period;
      s -= infect;
      e += infect - onset;
      im += kMildFraction * onset - mild_end;
      is += (1.0 - kMildFraction) * onset - admit;
      hd += kHospitalDeathFraction * admit - die;
      hr += (1.0 - kHospitalDeathFraction) * admit - discharge;
      dead += die;
    }
    out.push_back(dead * kPopulation);
  }
  return out;
}

std::vector<double> additive(const ToyParams& p, int horizon) {
  auto unit = [](const ToyInput& in, double v) { return (v - in.lo) / (in.hi - in.lo); };
  const double rate = 4.0 * unit(kToyInputs[0], p.infection_rate) + 2.0 * unit(kToyInputs[3], p.mild_recovery_period) +
                      1.0 * unit(kToyInputs[1], p.mortality_period) + 0.5 * unit(kToyInputs[4], p.incubation_period) +
                      0.25 * unit(kToyInputs[5], p.period_to_hospitalisation) +
                      0.1 * unit(kToyInputs[2], p.recovery_period);
  std::vector<double> out;
  for (int t = 1; t <= horizon; ++t) out.push_back(rate * t);
  return out;
}

}  // namespace

ToyParams toy_params_from_json(const nlohmann::json& j, std::vector<std::string>* warnings) {
  if (!j.is_object()) throw ConfigError("toy model input must be a JSON object");
  ToyParams p;
  for (const auto& [key, value] : j.items()) {
    double* f = field(p, key);
    if (!f) throw ConfigError("toy model has no parameter '" + key + "'");
    if (!value.is_number()) throw ConfigError("toy model parameter '" + key + "' must be a number");
    *f = value.get<double>();
  }
  for (const auto& in : kToyInputs) {
    double* f = field(p, in.name);
    const double clamped = std::clamp(*f, in.lo, in.hi);
    if (clamped != *f || !std::isfinite(*f)) {
      if (warnings)
        warnings->push_back(std::string(in.name) + "=" + format_double(*f) + " clamped to [" + format_double(in.lo) +
                            ", " + format_double(in.hi) + "]");
      *f = std::isfinite(*f) ? clamped : in.fallback;
    }
  }
  return p;
}

std::vector<double> toy_model(const ToyParams& p, const ToyOptions& opts) {
  if (opts.horizon < 0) throw DomainError("horizon must be >= 0");
  auto dead = opts.variant == ToyVariant::additive ? additive(p, opts.horizon) : epidemic(p, opts.horizon);
  if (opts.noise > 0.0 && !dead.empty()) {
    // perturb daily increments so the series stays non-decreasing
    CounterRng rng(opts.seed);
    double prev_clean = 0.0, total = 0.0;
    for (auto& d : dead) {
      const double inc = d - prev_clean;
      prev_clean = d;
      const double u1 = rng.uniform(), u2 = rng.uniform();
      const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
      total += inc * std::exp(opts.noise * z);
      d = total;
    }
  }
  return dead;
}

std::string toy_csv(const std::vector<double>& dead) {
  std::string out = "t,dead\n";
  for (std::size_t i = 0; i < dead.size(); ++i) out += std::to_string(i + 1) + "," + format_double(dead[i]) + "\n";
  return out;
}

}  // namespace vvuq::driver
