#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

namespace vvuq::sampling {

/// Orthonormal polynomial families. Legendre is orthonormal under the
/// uniform probability measure on [-1,1]; Hermite under the standard normal
/// (probabilists' convention).
enum class PolyFamily { legendre, hermite };

inline std::string to_string(PolyFamily f) {
  return f == PolyFamily::legendre ? "legendre" : "hermite";
}

/// Off-diagonal Jacobi coefficient sqrt(beta_k), k >= 1, in
/// b_{k+1} p_{k+1}(x) = x p_k(x) - b_k p_{k-1}(x).
inline double jacobi_offdiag(PolyFamily f, int k) {
  const double kk = static_cast<double>(k);
  if (f == PolyFamily::legendre) return kk / std::sqrt(4.0 * kk * kk - 1.0);
  return std::sqrt(kk);
}

/// Fills out[0..max_degree] with p_0(x)..p_max(x).
inline void orthonormal_values(PolyFamily f, double x, std::span<double> out) {
  if (out.empty()) return;
  out[0] = 1.0;
  if (out.size() == 1) return;
  out[1] = x / jacobi_offdiag(f, 1);
  for (std::size_t k = 1; k + 1 < out.size(); ++k) {
    const int ki = static_cast<int>(k);
    out[k + 1] = (x * out[k] - jacobi_offdiag(f, ki) * out[k - 1]) / jacobi_offdiag(f, ki + 1);
  }
}

inline std::vector<double> orthonormal_values(PolyFamily f, int max_degree, double x) {
  std::vector<double> out(static_cast<std::size_t>(max_degree) + 1);
  orthonormal_values(f, x, out);
  return out;
}

struct PolyWithDerivative {
  double value;
  double derivative;
  double previous;  // p_{n-1}(x)
};

/// p_n(x) and p_n'(x) via the differentiated three-term recurrence.
inline PolyWithDerivative orthonormal_with_derivative(PolyFamily f, int n, double x) {
  double p_prev = 0.0, p = 1.0;
  double d_prev = 0.0, d = 0.0;
  for (int k = 0; k < n; ++k) {
    const double b_next = jacobi_offdiag(f, k + 1);
    const double b_k = k == 0 ? 0.0 : jacobi_offdiag(f, k);
    const double p_next = (x * p - b_k * p_prev) / b_next;
    const double d_next = (p + x * d - b_k * d_prev) / b_next;
    p_prev = p;
    p = p_next;
    d_prev = d;
    d = d_next;
  }
  return {p, d, p_prev};
}

}  // namespace vvuq::sampling
