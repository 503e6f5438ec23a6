#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "vvuq/core/errors.hpp"
#include "vvuq/core/parameter.hpp"
#include "vvuq/core/rng.hpp"
#include "vvuq/sampling/grid.hpp"

namespace vvuq::sampling {

struct McSpec {
  std::size_t n = 0;
  std::uint64_t seed = 0;
};
struct HaltonSpec {
  std::size_t n = 0;
  std::size_t skip = 0;
};
/// Stochastic collocation: per-dimension `level`, tensor or Smolyak sparse.
struct ScSpec {
  int level = 0;
  Growth growth = Growth::clenshaw_curtis;
  bool sparse = false;
};
/// Tensor Gauss plan with order+1 nodes per dimension.
struct PceSpec {
  int order = 0;
};

using SamplerSpec = std::variant<McSpec, HaltonSpec, ScSpec, PceSpec>;

inline bool is_quadrature(const SamplerSpec& s) {
  return std::holds_alternative<ScSpec>(s) || std::holds_alternative<PceSpec>(s);
}

inline std::string sampler_name(const SamplerSpec& s) {
  switch (s.index()) {
    case 0: return "mc";
    case 1: return "halton";
    case 2: return "sc";
    default: return "pce";
  }
}

/// The quadrature layout of an sc/pce stage in the reference domain. Tensor
/// plans are represented as a sparse grid with a single component.
struct QuadraturePlan {
  std::vector<std::size_t> active;  // parameter indices of the grid dimensions
  SparseGrid grid;
};

struct Sample {
  std::vector<double> values;  // one per parameter, in space order
  std::optional<double> weight;
};

inline std::vector<std::size_t> active_dimensions(std::span<const ParameterDef> space) {
  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < space.size(); ++i)
    if (!space[i].distribution.is_constant()) active.push_back(i);
  return active;
}

inline void validate_spec(const SamplerSpec& spec) {
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, McSpec> || std::is_same_v<T, HaltonSpec>) {
          if (s.n < 1) throw SamplerError("sample count must be >= 1");
        } else if constexpr (std::is_same_v<T, ScSpec>) {
          if (s.level < 0) throw SamplerError("collocation level must be >= 0");
        } else {
          if (s.order < 0) throw SamplerError("polynomial order must be >= 0");
        }
      },
      spec);
}

inline QuadraturePlan quadrature_plan(std::span<const ParameterDef> space, const SamplerSpec& spec,
                                      std::size_t cap = kDefaultPointCap) {
  validate_spec(spec);
  if (!is_quadrature(spec)) throw SamplerError("sampler '" + sampler_name(spec) + "' has no quadrature plan");
  QuadraturePlan plan;
  plan.active = active_dimensions(space);
  if (plan.active.empty())
    throw SamplerError("quadrature sampler needs at least one non-constant parameter");

  int level = 0;
  bool sparse = false;
  Growth growth = Growth::linear;
  if (const auto* sc = std::get_if<ScSpec>(&spec)) {
    level = sc->level;
    sparse = sc->sparse;
    growth = sc->growth;
  } else {
    level = std::get<PceSpec>(spec).order;
  }

  std::vector<RuleKind> kinds;
  for (auto i : plan.active) {
    const auto& dist = space[i].distribution;
    if (dist.is_normal()) kinds.push_back(RuleKind::gauss_hermite);
    else if (growth == Growth::clenshaw_curtis) kinds.push_back(RuleKind::clenshaw_curtis);
    else kinds.push_back(RuleKind::gauss_legendre);
  }

  if (sparse) {
    plan.grid = smolyak_grid(kinds, level, cap);
    return plan;
  }

  std::vector<QuadRule> rules;
  for (auto k : kinds) rules.push_back(rule_at_level(k, level));
  Grid g = tensor_grid(rules, cap);
  SparseGrid& sg = plan.grid;
  sg.dim = kinds.size();
  sg.level = level;
  sg.kinds = kinds;
  sg.merged = true;
  SparseComponent comp;
  comp.levels.assign(kinds.size(), level);
  comp.coefficient = 1;
  for (const auto& r : rules) comp.sizes.push_back(static_cast<int>(r.size()));
  comp.weights = g.weights;
  comp.point_ids.resize(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) comp.point_ids[j] = j;
  sg.points = std::move(g.points);
  sg.weights = std::move(g.weights);
  sg.components.push_back(std::move(comp));
  return plan;
}

/// Radical inverse of `index` in `base` (van der Corput).
inline double radical_inverse(std::uint64_t index, std::uint32_t base) {
  double result = 0.0;
  double f = 1.0 / base;
  while (index > 0) {
    result += f * static_cast<double>(index % base);
    index /= base;
    f /= base;
  }
  return result;
}

inline std::vector<std::uint32_t> first_primes(std::size_t count) {
  std::vector<std::uint32_t> primes;
  for (std::uint32_t c = 2; primes.size() < count; ++c) {
    bool prime = true;
    for (auto p : primes) {
      if (p * p > c) break;
      if (c % p == 0) {
        prime = false;
        break;
      }
    }
    if (prime) primes.push_back(c);
  }
  return primes;
}

/// Parameter sets for one sampling stage. Pure function of (space, spec).
inline std::vector<Sample> draw(std::span<const ParameterDef> space, const SamplerSpec& spec,
                                std::size_t cap = kDefaultPointCap) {
  validate_spec(spec);
  const auto active = active_dimensions(space);
  auto pinned = [&]() {
    std::vector<double> v(space.size());
    for (std::size_t i = 0; i < space.size(); ++i) v[i] = space[i].distribution.mean();
    return v;
  };

  std::vector<Sample> out;
  if (const auto* mc = std::get_if<McSpec>(&spec)) {
    if (active.empty()) throw SamplerError("Monte Carlo sampler needs a non-constant parameter");
    if (mc->n > cap) throw SizeError("sample count exceeds the point cap");
    const CounterRng rng(mc->seed);
    const std::uint64_t d = active.size();
    out.reserve(mc->n);
    for (std::uint64_t i = 0; i < mc->n; ++i) {
      Sample s{pinned(), std::nullopt};
      for (std::uint64_t j = 0; j < d; ++j)
        s.values[active[j]] = space[active[j]].distribution.quantile(rng.uniform_at(i * d + j));
      out.push_back(std::move(s));
    }
    return out;
  }
  if (const auto* h = std::get_if<HaltonSpec>(&spec)) {
    if (active.empty()) throw SamplerError("Halton sampler needs a non-constant parameter");
    if (h->n > cap) throw SizeError("sample count exceeds the point cap");
    const auto primes = first_primes(active.size());
    out.reserve(h->n);
    for (std::uint64_t i = 0; i < h->n; ++i) {
      Sample s{pinned(), std::nullopt};
      for (std::size_t j = 0; j < active.size(); ++j)
        s.values[active[j]] =
            space[active[j]].distribution.quantile(radical_inverse(i + h->skip + 1, primes[j]));
      out.push_back(std::move(s));
    }
    return out;
  }

  const QuadraturePlan plan = quadrature_plan(space, spec, cap);
  out.reserve(plan.grid.size());
  for (std::size_t p = 0; p < plan.grid.size(); ++p) {
    Sample s{pinned(), plan.grid.weights[p]};
    for (std::size_t j = 0; j < plan.active.size(); ++j)
      s.values[plan.active[j]] = space[plan.active[j]].distribution.from_reference(plan.grid.points[p][j]);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace vvuq::sampling
