#pragma once

#include <boost/math/distributions/normal.hpp>

#include <cmath>
#include <string>
#include <variant>

#include "vvuq/core/errors.hpp"
#include "vvuq/core/numeric_format.hpp"

namespace vvuq::sampling {

struct Uniform {
  double lo;
  double hi;
};
struct Normal {
  double mu;
  double sigma;
};
struct Constant {
  double value;
};

/// One-dimensional input probability model.
class Distribution1D {
 public:
  using Variant = std::variant<Uniform, Normal, Constant>;

  static Distribution1D uniform(double lo, double hi) {
    if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi))
      throw ConfigError("uniform distribution requires lo < hi, got (" + format_double(lo) +
                        ", " + format_double(hi) + ")");
    return Distribution1D(Uniform{lo, hi});
  }
  static Distribution1D normal(double mu, double sigma) {
    if (!(std::isfinite(mu) && std::isfinite(sigma) && sigma > 0.0))
      throw ConfigError("normal distribution requires sigma > 0, got " + format_double(sigma));
    return Distribution1D(Normal{mu, sigma});
  }
  static Distribution1D constant(double value) {
    if (!std::isfinite(value)) throw ConfigError("constant distribution requires a finite value");
    return Distribution1D(Constant{value});
  }

  const Variant& variant() const { return v_; }
  bool is_constant() const { return std::holds_alternative<Constant>(v_); }
  bool is_uniform() const { return std::holds_alternative<Uniform>(v_); }
  bool is_normal() const { return std::holds_alternative<Normal>(v_); }

  std::string type_name() const {
    return std::visit(
        [](const auto& d) -> std::string {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, Uniform>) return "uniform";
          else if constexpr (std::is_same_v<T, Normal>) return "normal";
          else return "constant";
        },
        v_);
  }

  /// Inverse CDF. Throws DomainError unless 0 < u < 1.
  double quantile(double u) const {
    if (!(u > 0.0 && u < 1.0))
      throw DomainError("quantile argument must lie in (0,1), got " + format_double(u));
    return std::visit(
        [u](const auto& d) -> double {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, Uniform>) {
            return d.lo + u * (d.hi - d.lo);
          } else if constexpr (std::is_same_v<T, Normal>) {
            return boost::math::quantile(boost::math::normal_distribution<double>(d.mu, d.sigma), u);
          } else {
            return d.value;
          }
        },
        v_);
  }

  double mean() const {
    return std::visit(
        [](const auto& d) -> double {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, Uniform>) return 0.5 * (d.lo + d.hi);
          else if constexpr (std::is_same_v<T, Normal>) return d.mu;
          else return d.value;
        },
        v_);
  }

  bool in_support(double x) const {
    return std::visit(
        [x](const auto& d) -> bool {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, Uniform>) return x >= d.lo && x <= d.hi;
          else if constexpr (std::is_same_v<T, Normal>) return std::isfinite(x);
          else return x == d.value;
        },
        v_);
  }

  // Reference domain is [-1,1] for uniform and the standard normal for normal.
  double from_reference(double z) const {
    return std::visit(
        [z](const auto& d) -> double {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, Uniform>) return d.lo + 0.5 * (z + 1.0) * (d.hi - d.lo);
          else if constexpr (std::is_same_v<T, Normal>) return d.mu + d.sigma * z;
          else return d.value;
        },
        v_);
  }

  double to_reference(double x) const {
    return std::visit(
        [x](const auto& d) -> double {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, Uniform>) return 2.0 * (x - d.lo) / (d.hi - d.lo) - 1.0;
          else if constexpr (std::is_same_v<T, Normal>) return (x - d.mu) / d.sigma;
          else return 0.0;
        },
        v_);
  }

  friend bool operator==(const Distribution1D& a, const Distribution1D& b) {
    if (a.v_.index() != b.v_.index()) return false;
    return std::visit(
        [&b](const auto& d) -> bool {
          using T = std::decay_t<decltype(d)>;
          const auto& o = std::get<T>(b.v_);
          if constexpr (std::is_same_v<T, Uniform>) return d.lo == o.lo && d.hi == o.hi;
          else if constexpr (std::is_same_v<T, Normal>) return d.mu == o.mu && d.sigma == o.sigma;
          else return d.value == o.value;
        },
        a.v_);
  }

 private:
  explicit Distribution1D(Variant v) : v_(v) {}
  Variant v_;
};

}  // namespace vvuq::sampling
