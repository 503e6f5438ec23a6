#pragma once

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "vvuq/core/errors.hpp"
#include "vvuq/sampling/orthopoly.hpp"

namespace vvuq::sampling {

enum class RuleKind { gauss_legendre, gauss_hermite, clenshaw_curtis };

inline std::string to_string(RuleKind k) {
  switch (k) {
    case RuleKind::gauss_legendre: return "gauss-legendre";
    case RuleKind::gauss_hermite: return "gauss-hermite";
    case RuleKind::clenshaw_curtis: return "clenshaw-curtis";
  }
  return "?";
}

/// 1-D quadrature rule on the reference domain with probability weights
/// (the weights sum to one).
struct QuadRule {
  RuleKind kind;
  int level = 0;
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }

  /// Highest monomial degree integrated exactly.
  int exactness() const {
    const int n = static_cast<int>(nodes.size());
    if (kind == RuleKind::clenshaw_curtis) return n % 2 == 1 ? n : n - 1;
    return 2 * n - 1;
  }

  /// Highest per-dimension polynomial degree whose products with each other
  /// are still integrated exactly (discrete orthonormality holds up to it).
  int projection_degree() const { return exactness() / 2; }

  PolyFamily family() const {
    return kind == RuleKind::gauss_hermite ? PolyFamily::hermite : PolyFamily::legendre;
  }
};

namespace detail {

// Golub-Welsch eigen-solve, then Newton polish on the orthonormal recurrence
// and Christoffel weights w_i = 1 / sum_k p_k(x_i)^2.
inline QuadRule gauss_rule(RuleKind kind, int n) {
  if (n < 1) throw DomainError("Gauss rule needs at least one node");
  const PolyFamily family =
      kind == RuleKind::gauss_hermite ? PolyFamily::hermite : PolyFamily::legendre;
  QuadRule rule{kind, n - 1, std::vector<double>(n), std::vector<double>(n)};
  if (n == 1) {
    rule.nodes[0] = 0.0;
    rule.weights[0] = 1.0;
    return rule;
  }

  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sub(n - 1);
  for (int k = 1; k < n; ++k) sub(k - 1) = jacobi_offdiag(family, k);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  std::vector<double> x(solver.eigenvalues().data(), solver.eigenvalues().data() + n);
  std::sort(x.begin(), x.end());

  for (double& xi : x) {
    for (int iter = 0; iter < 8; ++iter) {
      const auto pd = orthonormal_with_derivative(family, n, xi);
      const double step = pd.value / pd.derivative;
      xi -= step;
      if (std::abs(step) <= 1e-17 * std::max(1.0, std::abs(xi))) break;
    }
  }

  // symmetric rules: mirror the upper half exactly, centre node is zero
  for (int i = 0; i < n / 2; ++i) {
    const double mag = 0.5 * (x[n - 1 - i] - x[i]);
    x[i] = -mag;
    x[n - 1 - i] = mag;
  }
  if (n % 2 == 1) x[n / 2] = 0.0;

  std::vector<double> w(n);
  std::vector<double> p(n);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    orthonormal_values(family, x[i], p);
    double s = 0.0;
    for (double pk : p) s += pk * pk;
    w[i] = 1.0 / s;
  }
  for (int i = 0; i < n / 2; ++i) w[n - 1 - i] = w[i] = 0.5 * (w[i] + w[n - 1 - i]);
  for (double wi : w) total += wi;
  for (double& wi : w) wi /= total;

  rule.nodes = std::move(x);
  rule.weights = std::move(w);
  return rule;
}

}  // namespace detail

/// n-point Gauss-Legendre rule for the uniform measure on [-1,1].
inline QuadRule gauss_legendre(int n) { return detail::gauss_rule(RuleKind::gauss_legendre, n); }

/// n-point Gauss-Hermite rule for the standard normal measure.
inline QuadRule gauss_hermite(int n) { return detail::gauss_rule(RuleKind::gauss_hermite, n); }

inline int clenshaw_curtis_points(int level) {
  if (level < 0) throw DomainError("Clenshaw-Curtis level must be >= 0");
  if (level > 30) throw SizeError("Clenshaw-Curtis level too large");
  return level == 0 ? 1 : (1 << level) + 1;
}

/// Nested Clenshaw-Curtis rule, m(0)=1 and m(l)=2^l+1 nodes.
///
/// Nodes are computed as sin(pi*(2j-m)/(2m)). Doubling both numerator and
/// denominator at the next level reproduces bit-identical arguments, so the
/// level-l node set is an exact subset of level l+1.
inline QuadRule clenshaw_curtis(int level) {
  const int n = clenshaw_curtis_points(level);
  QuadRule rule{RuleKind::clenshaw_curtis, level, std::vector<double>(n), std::vector<double>(n)};
  if (n == 1) {
    rule.nodes[0] = 0.0;
    rule.weights[0] = 1.0;
    return rule;
  }
  const int m = n - 1;
  for (int j = 0; j < n; ++j) {
    const double num = static_cast<double>(2 * j - m);
    const double den = static_cast<double>(2 * m);
    rule.nodes[j] = std::sin(std::numbers::pi * num / den);
  }
  rule.nodes[m / 2] = 0.0;

  // Classical closed form; the [-1,1] weights sum to 2, halved for probability.
  for (int j = 0; j < n; ++j) {
    const double theta = std::numbers::pi * j / m;
    double s = 0.0;
    for (int k = 1; k <= m / 2; ++k) {
      const double b = (2 * k == m) ? 1.0 : 2.0;
      s += b / (4.0 * k * k - 1.0) * std::cos(2.0 * k * theta);
    }
    const double c = (j == 0 || j == m) ? 1.0 : 2.0;
    rule.weights[j] = 0.5 * c / m * (1.0 - s);
  }
  for (int j = 0; j < n / 2; ++j)
    rule.weights[n - 1 - j] = rule.weights[j] = 0.5 * (rule.weights[j] + rule.weights[n - 1 - j]);
  return rule;
}

/// Growth rule for the uniform dimensions of a collocation plan: nested
/// Clenshaw-Curtis (2^l+1) or linear Gauss-Legendre (l+1). Normal
/// dimensions always use linear-growth Gauss-Hermite.
enum class Growth { clenshaw_curtis, linear };

inline std::string to_string(Growth g) { return g == Growth::clenshaw_curtis ? "cc" : "linear"; }

inline QuadRule rule_at_level(RuleKind kind, int level) {
  if (level < 0) throw DomainError("quadrature level must be >= 0");
  switch (kind) {
    case RuleKind::clenshaw_curtis: return clenshaw_curtis(level);
    case RuleKind::gauss_legendre: return gauss_legendre(level + 1);
    case RuleKind::gauss_hermite: return gauss_hermite(level + 1);
  }
  return gauss_legendre(level + 1);
}

}  // namespace vvuq::sampling
