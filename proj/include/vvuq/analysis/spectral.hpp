#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vvuq/core/errors.hpp"
#include "vvuq/core/parameter.hpp"
#include "vvuq/sampling/grid.hpp"
#include "vvuq/sampling/orthopoly.hpp"
#include "vvuq/sampling/sampler.hpp"

namespace vvuq::analysis {

using sampling::MultiIndex;
using sampling::PolyFamily;

/// Orthonormal polynomial-chaos coefficients. Each term carries one
/// coefficient per QoI point (time step).
struct SpectralSurrogate {
  std::vector<PolyFamily> families;
  std::size_t width = 0;
  std::map<MultiIndex, std::vector<double>> terms;

  const std::vector<double>* find(const MultiIndex& k) const {
    auto it = terms.find(k);
    return it == terms.end() ? nullptr : &it->second;
  }
};

struct Moments {
  std::vector<double> mean;
  std::vector<double> variance;
};

/// Per QoI point: total variance and first/total order indices. An index is
/// std::nullopt where the variance is degenerate.
struct SobolReport {
  std::size_t dims = 0;
  std::vector<double> variance;
  std::vector<std::vector<std::optional<double>>> first;  // [dim][point]
  std::vector<std::vector<std::optional<double>>> total;  // [dim][point]
};

inline constexpr double kDegenerateVariance = 1e-14;

/// Pseudo-spectral projection by the combination technique: each component
/// tensor grid is projected onto the polynomials its rule integrates
/// exactly in pairs, and the component surrogates are summed with their
/// Smolyak coefficients. `values[p]` is the QoI vector at grid point p.
inline SpectralSurrogate project(const sampling::SparseGrid& grid,
                                 std::span<const std::vector<double>> values) {
  if (values.size() != grid.size())
    throw MissingRunError("projection needs " + std::to_string(grid.size()) +
                          " collocation values, got " + std::to_string(values.size()));
  SpectralSurrogate s;
  const std::size_t d = grid.dim;
  for (auto k : grid.kinds)
    s.families.push_back(k == sampling::RuleKind::gauss_hermite ? PolyFamily::hermite
                                                                : PolyFamily::legendre);
  s.width = values.empty() ? 0 : values.front().size();
  for (const auto& v : values)
    if (v.size() != s.width) throw MissingRunError("ragged QoI vectors in projection");

  for (const auto& comp : grid.components) {
    std::vector<sampling::QuadRule> rules;
    std::vector<int> max_deg(d);
    // basis[i][node][deg]
    std::vector<std::vector<std::vector<double>>> basis(d);
    for (std::size_t i = 0; i < d; ++i) {
      rules.push_back(sampling::rule_at_level(grid.kinds[i], comp.levels[i]));
      max_deg[i] = rules[i].projection_degree();
      for (double x : rules[i].nodes)
        basis[i].push_back(sampling::orthonormal_values(s.families[i], max_deg[i], x));
    }

    // node index per dimension for each tensor point (last dim fastest)
    const std::size_t n = comp.point_ids.size();
    std::vector<std::vector<int>> node(n, std::vector<int>(d));
    for (std::size_t j = 0; j < n; ++j) {
      std::size_t rem = j;
      for (std::size_t i = d; i-- > 0;) {
        node[j][i] = static_cast<int>(rem % static_cast<std::size_t>(comp.sizes[i]));
        rem /= static_cast<std::size_t>(comp.sizes[i]);
      }
    }

    MultiIndex m(d, 0);
    std::vector<double> acc(s.width);
    while (true) {
      std::fill(acc.begin(), acc.end(), 0.0);
      for (std::size_t j = 0; j < n; ++j) {
        double phi = comp.weights[j];
        for (std::size_t i = 0; i < d; ++i) phi *= basis[i][node[j][i]][m[i]];
        const auto& y = values[comp.point_ids[j]];
        for (std::size_t t = 0; t < s.width; ++t) acc[t] += phi * y[t];
      }
      auto& c = s.terms[m];
      if (c.empty()) c.assign(s.width, 0.0);
      for (std::size_t t = 0; t < s.width; ++t) c[t] += static_cast<double>(comp.coefficient) * acc[t];

      std::size_t i = d;
      while (i-- > 0) {
        if (++m[i] <= max_deg[i]) break;
        m[i] = 0;
      }
      if (i == static_cast<std::size_t>(-1)) break;
    }
  }
  return s;
}

/// Projection for a campaign quadrature plan; checks that every grid
/// dimension's rule matches its input distribution.
inline SpectralSurrogate project(const sampling::QuadraturePlan& plan,
                                 std::span<const ParameterDef> space,
                                 std::span<const std::vector<double>> values) {
  for (std::size_t j = 0; j < plan.active.size(); ++j) {
    const auto& dist = space[plan.active[j]].distribution;
    const bool hermite = plan.grid.kinds[j] == sampling::RuleKind::gauss_hermite;
    if (dist.is_constant() || dist.is_normal() != hermite)
      throw BasisError("no orthonormal basis for parameter '" + space[plan.active[j]].name +
                       "' (" + dist.type_name() + ") on rule " + sampling::to_string(plan.grid.kinds[j]));
  }
  return project(plan.grid, values);
}

inline Moments moments(const SpectralSurrogate& s) {
  Moments m{std::vector<double>(s.width, 0.0), std::vector<double>(s.width, 0.0)};
  for (const auto& [k, c] : s.terms) {
    bool zero = true;
    for (int ki : k) zero = zero && ki == 0;
    for (std::size_t t = 0; t < s.width; ++t) {
      if (zero) m.mean[t] += c[t];
      else m.variance[t] += c[t] * c[t];
    }
  }
  return m;
}

inline SobolReport sobol(const SpectralSurrogate& s, double degenerate = kDegenerateVariance) {
  const std::size_t d = s.families.size();
  SobolReport r;
  r.dims = d;
  r.variance = moments(s).variance;
  std::vector<std::vector<double>> first(d, std::vector<double>(s.width, 0.0));
  std::vector<std::vector<double>> total(d, std::vector<double>(s.width, 0.0));
  for (const auto& [k, c] : s.terms) {
    std::size_t nonzero = 0, which = 0;
    for (std::size_t i = 0; i < d; ++i)
      if (k[i] > 0) {
        ++nonzero;
        which = i;
      }
    if (nonzero == 0) continue;
    for (std::size_t t = 0; t < s.width; ++t) {
      const double c2 = c[t] * c[t];
      if (nonzero == 1) first[which][t] += c2;
      for (std::size_t i = 0; i < d; ++i)
        if (k[i] > 0) total[i][t] += c2;
    }
  }
  r.first.assign(d, std::vector<std::optional<double>>(s.width));
  r.total.assign(d, std::vector<std::optional<double>>(s.width));
  for (std::size_t t = 0; t < s.width; ++t) {
    const double D = r.variance[t];
    if (!(D > degenerate)) continue;
    for (std::size_t i = 0; i < d; ++i) {
      r.first[i][t] = first[i][t] / D;
      r.total[i][t] = total[i][t] / D;
    }
  }
  return r;
}

}  // namespace vvuq::analysis
