#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "vvuq/core/errors.hpp"
#include "vvuq/sampling/quadrature.hpp"

namespace vvuq::sampling {

using Point = std::vector<double>;
using MultiIndex = std::vector<int>;

inline constexpr std::size_t kDefaultPointCap = 10'000'000;
inline constexpr double kMergeTolerance = 1e-12;

/// Points in the reference domain with probability weights.
struct Grid {
  std::size_t dim = 0;
  std::vector<Point> points;
  std::vector<double> weights;

  std::size_t size() const { return points.size(); }
};

inline std::size_t checked_product(std::span<const QuadRule> rules, std::size_t cap) {
  std::size_t total = 1;
  for (const auto& r : rules) {
    if (r.size() != 0 && total > cap / r.size())
      throw SizeError("tensor grid exceeds the point cap of " + std::to_string(cap));
    total *= r.size();
  }
  if (total > cap) throw SizeError("tensor grid exceeds the point cap of " + std::to_string(cap));
  return total;
}

/// Cartesian product of 1-D rules, last dimension varying fastest.
inline Grid tensor_grid(std::span<const QuadRule> rules, std::size_t cap = kDefaultPointCap) {
  const std::size_t total = checked_product(rules, cap);
  const std::size_t d = rules.size();
  Grid g;
  g.dim = d;
  g.points.reserve(total);
  g.weights.reserve(total);
  std::vector<std::size_t> idx(d, 0);
  for (std::size_t count = 0; count < total; ++count) {
    Point p(d);
    double w = 1.0;
    for (std::size_t i = 0; i < d; ++i) {
      p[i] = rules[i].nodes[idx[i]];
      w *= rules[i].weights[idx[i]];
    }
    g.points.push_back(std::move(p));
    g.weights.push_back(w);
    for (std::size_t i = d; i-- > 0;) {
      if (++idx[i] < rules[i].size()) break;
      idx[i] = 0;
    }
  }
  return g;
}

/// Smolyak combination coefficient (-1)^(L-|k|) C(d-1, L-|k|) for
/// L-d+1 <= |k| <= L, zero otherwise.
inline long long smolyak_coefficient(std::size_t d, int level, int norm) {
  const int gap = level - norm;
  if (gap < 0 || gap > static_cast<int>(d) - 1) return 0;
  long long binom = 1;
  for (int i = 1; i <= gap; ++i) binom = binom * (static_cast<long long>(d) - i) / i;
  return gap % 2 == 0 ? binom : -binom;
}

/// Multi-indices k >= 0 with lo <= |k| <= hi, lexicographic order.
inline std::vector<MultiIndex> multi_indices(std::size_t d, int lo, int hi) {
  std::vector<MultiIndex> out;
  if (d == 0 || hi < 0) return out;
  MultiIndex k(d, 0);
  auto rec = [&](auto&& self, std::size_t pos, int used) -> void {
    if (pos + 1 == d) {
      for (int v = 0; used + v <= hi; ++v) {
        if (used + v >= lo) {
          k[pos] = v;
          out.push_back(k);
        }
      }
      return;
    }
    for (int v = 0; used + v <= hi; ++v) {
      k[pos] = v;
      self(self, pos + 1, used + v);
    }
  };
  rec(rec, 0, 0);
  return out;
}

/// One tensor grid of the combination technique.
struct SparseComponent {
  MultiIndex levels;
  long long coefficient = 0;
  std::vector<int> sizes;                // nodes per dimension
  std::vector<std::size_t> point_ids;    // into SparseGrid::points, tensor order
  std::vector<double> weights;           // tensor-local probability weights
};

struct SparseGrid {
  std::size_t dim = 0;
  int level = 0;
  std::vector<RuleKind> kinds;
  bool merged = true;
  std::vector<Point> points;
  std::vector<double> weights;  // combined; individual entries may be negative
  std::vector<SparseComponent> components;

  std::size_t size() const { return points.size(); }
  Grid as_grid() const { return Grid{dim, points, weights}; }
};

namespace detail {

struct ToleranceLess {
  bool operator()(const Point& a, const Point& b) const {
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (std::abs(a[i] - b[i]) > kMergeTolerance) return a[i] < b[i];
    }
    return false;
  }
};

}  // namespace detail

/// Smolyak sparse grid by the combination technique over per-dimension rule
/// kinds. Duplicate points are merged (summing weights) unless a dimension
/// is Gauss-Hermite, whose rules are not nested.
inline SparseGrid smolyak_grid(std::span<const RuleKind> kinds, int level,
                               std::size_t cap = kDefaultPointCap) {
  const std::size_t d = kinds.size();
  if (d == 0) throw SamplerError("sparse grid needs at least one dimension");
  if (level < 0) throw DomainError("sparse grid level must be >= 0");

  SparseGrid sg;
  sg.dim = d;
  sg.level = level;
  sg.kinds.assign(kinds.begin(), kinds.end());
  for (auto k : kinds)
    if (k == RuleKind::gauss_hermite) sg.merged = false;

  // 1-D rules cached per (dimension kind, level)
  std::map<std::pair<RuleKind, int>, QuadRule> cache;
  auto rule = [&](RuleKind k, int l) -> const QuadRule& {
    auto it = cache.find({k, l});
    if (it == cache.end()) it = cache.emplace(std::pair{k, l}, rule_at_level(k, l)).first;
    return it->second;
  };

  const int lo = std::max(0, level - static_cast<int>(d) + 1);
  std::size_t work = 0;
  std::vector<Grid> tensors;
  for (auto& k : multi_indices(d, lo, level)) {
    const int norm = std::accumulate(k.begin(), k.end(), 0);
    SparseComponent comp;
    comp.coefficient = smolyak_coefficient(d, level, norm);
    if (comp.coefficient == 0) continue;
    std::vector<QuadRule> rules;
    rules.reserve(d);
    for (std::size_t i = 0; i < d; ++i) {
      rules.push_back(rule(kinds[i], k[i]));
      comp.sizes.push_back(static_cast<int>(rules.back().size()));
    }
    const std::size_t n = checked_product(rules, cap);
    if (work > cap - n) throw SizeError("sparse grid exceeds the point cap of " + std::to_string(cap));
    work += n;
    tensors.push_back(tensor_grid(rules, cap));
    comp.levels = std::move(k);
    comp.weights = tensors.back().weights;
    sg.components.push_back(std::move(comp));
  }

  if (sg.merged) {
    std::map<Point, std::size_t, detail::ToleranceLess> index;
    for (const auto& t : tensors)
      for (const auto& p : t.points) index.emplace(p, 0);
    sg.points.reserve(index.size());
    for (auto& [p, id] : index) {
      id = sg.points.size();
      sg.points.push_back(p);
    }
    sg.weights.assign(sg.points.size(), 0.0);
    for (std::size_t c = 0; c < sg.components.size(); ++c) {
      auto& comp = sg.components[c];
      comp.point_ids.reserve(tensors[c].size());
      for (std::size_t j = 0; j < tensors[c].size(); ++j) {
        const std::size_t id = index.at(tensors[c].points[j]);
        comp.point_ids.push_back(id);
        sg.weights[id] += static_cast<double>(comp.coefficient) * tensors[c].weights[j];
      }
    }
  } else {
    for (std::size_t c = 0; c < sg.components.size(); ++c) {
      auto& comp = sg.components[c];
      for (std::size_t j = 0; j < tensors[c].size(); ++j) {
        comp.point_ids.push_back(sg.points.size());
        sg.points.push_back(tensors[c].points[j]);
        sg.weights.push_back(static_cast<double>(comp.coefficient) * tensors[c].weights[j]);
      }
    }
  }
  return sg;
}

/// Isotropic sparse grid with a single growth rule for every dimension.
inline SparseGrid smolyak_grid(std::size_t d, int level, Growth growth,
                               std::size_t cap = kDefaultPointCap) {
  const RuleKind kind =
      growth == Growth::clenshaw_curtis ? RuleKind::clenshaw_curtis : RuleKind::gauss_legendre;
  const std::vector<RuleKind> kinds(d, kind);
  return smolyak_grid(kinds, level, cap);
}

}  // namespace vvuq::sampling
