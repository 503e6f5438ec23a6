#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "vvuq/analysis/spectral.hpp"

namespace vvuq::analysis {
namespace {

using sampling::Distribution1D;
using sampling::Growth;
using sampling::QuadraturePlan;

std::vector<ParameterDef> uniforms(std::size_t d) {
  std::vector<ParameterDef> s;
  for (std::size_t i = 0; i < d; ++i)
    s.push_back({"x" + std::to_string(i), ParamKind::real, 0.0, Distribution1D::uniform(-1, 1)});
  return s;
}

std::vector<std::vector<double>> evaluate(const QuadraturePlan& plan, const std::vector<ParameterDef>& space,
                                          const std::function<std::vector<double>(const std::vector<double>&)>& f) {
  std::vector<std::vector<double>> out;
  for (const auto& p : plan.grid.points) {
    std::vector<double> x(p.size());
    for (std::size_t j = 0; j < p.size(); ++j) x[j] = space[plan.active[j]].distribution.from_reference(p[j]);
    out.push_back(f(x));
  }
  return out;
}

SpectralSurrogate fit(const std::vector<ParameterDef>& space, const sampling::SamplerSpec& spec,
                      const std::function<double(const std::vector<double>&)>& f) {
  const auto plan = sampling::quadrature_plan(space, spec);
  const auto values = evaluate(plan, space, [&](const auto& x) { return std::vector<double>{f(x)}; });
  return project(plan, space, values);
}

TEST(Project, ConstantModel) {
  const auto s = fit(uniforms(2), sampling::ScSpec{2, Growth::linear, false}, [](auto&) { return 5.0; });
  for (const auto& [k, c] : s.terms) {
    if (k == sampling::MultiIndex{0, 0}) EXPECT_NEAR(c[0], 5.0, 1e-10);
    else EXPECT_NEAR(c[0], 0.0, 1e-10);
  }
  const auto m = moments(s);
  EXPECT_NEAR(m.mean[0], 5.0, 1e-12);
  EXPECT_NEAR(m.variance[0], 0.0, 1e-12);
  const auto r = sobol(s);
  EXPECT_FALSE(r.first[0][0].has_value());
  EXPECT_FALSE(r.total[1][0].has_value());
}

TEST(Project, LinearOnTwoPointLegendre) {
  // E[x * sqrt(3) x] = sqrt(3)/3 = 1/sqrt(3)
  const auto s = fit(uniforms(1), sampling::PceSpec{1}, [](auto& x) { return x[0]; });
  EXPECT_NEAR((*s.find({1}))[0], 1.0 / std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(moments(s).variance[0], 1.0 / 3.0, 1e-10);
  EXPECT_NEAR(moments(s).mean[0], 0.0, 1e-15);
}

TEST(Project, BilinearOnlyMixedTerm) {
  const auto s = fit(uniforms(2), sampling::PceSpec{2}, [](auto& x) { return x[0] * x[1]; });
  for (const auto& [k, c] : s.terms) {
    if (k == sampling::MultiIndex{1, 1}) EXPECT_NEAR(c[0], 1.0 / 3.0, 1e-14);
    else EXPECT_NEAR(c[0], 0.0, 1e-14) << k[0] << "," << k[1];
  }
}

TEST(Moments, StandardNormal) {
  std::vector<ParameterDef> space{{"z", ParamKind::real, 0.0, Distribution1D::normal(0, 1)}};
  for (int order = 1; order <= 5; ++order) {
    const auto s = fit(space, sampling::PceSpec{order}, [](auto& x) { return x[0]; });
    EXPECT_NEAR(moments(s).mean[0], 0.0, 1e-14);
    EXPECT_NEAR(moments(s).variance[0], 1.0, 1e-12);
  }
}

TEST(Sobol, AdditiveSymmetric) {
  const auto r = sobol(fit(uniforms(2), sampling::PceSpec{2}, [](auto& x) { return x[0] + x[1]; }));
  EXPECT_NEAR(*r.first[0][0], 0.5, 1e-12);
  EXPECT_NEAR(*r.first[1][0], 0.5, 1e-12);
  EXPECT_NEAR(*r.total[0][0], 0.5, 1e-12);
  EXPECT_NEAR(*r.total[1][0], 0.5, 1e-12);
}

TEST(Sobol, SingleFactor) {
  const auto r = sobol(fit(uniforms(2), sampling::PceSpec{2}, [](auto& x) { return 3.0 * x[0]; }));
  EXPECT_NEAR(*r.first[0][0], 1.0, 1e-12);
  EXPECT_NEAR(*r.first[1][0], 0.0, 1e-12);
  EXPECT_NEAR(*r.total[1][0], 0.0, 1e-12);
}

TEST(Sobol, BilinearInteraction) {
  auto model = [](auto& x) { return x[0] + x[1] + x[0] * x[1]; };
  for (const auto& spec : std::vector<sampling::SamplerSpec>{
           sampling::PceSpec{2}, sampling::ScSpec{2, Growth::clenshaw_curtis, true},
           sampling::ScSpec{3, Growth::clenshaw_curtis, true}, sampling::ScSpec{2, Growth::linear, true}}) {
    const auto r = sobol(fit(uniforms(2), spec, model));
    EXPECT_NEAR(*r.first[0][0], 3.0 / 7.0, 1e-12);
    EXPECT_NEAR(*r.first[1][0], 3.0 / 7.0, 1e-12);
    EXPECT_NEAR(*r.total[0][0], 4.0 / 7.0, 1e-12);
    EXPECT_NEAR(*r.total[1][0], 4.0 / 7.0, 1e-12);
    EXPECT_NEAR(r.variance[0], 7.0 / 9.0, 1e-12);
  }
}

TEST(Sobol, DegreeSaturation) {
  auto model = [](auto& x) { return 1.0 + x[0] * x[0] + 2.0 * x[1] - x[0] * x[1] * x[1]; };
  const auto a = fit(uniforms(2), sampling::PceSpec{3}, model);
  const auto b = fit(uniforms(2), sampling::PceSpec{6}, model);
  for (const auto& [k, c] : b.terms) {
    const auto* ca = a.find(k);
    EXPECT_NEAR(ca ? (*ca)[0] : 0.0, c[0], 1e-10);
  }
}

TEST(Sobol, VectorQoIIsPointwise) {
  const auto space = uniforms(3);
  const auto plan = sampling::quadrature_plan(space, sampling::ScSpec{3, Growth::clenshaw_curtis, true});
  auto f = [](const std::vector<double>& x, double t) { return t * x[0] + (1 - t) * x[1] * x[2] + x[0] * x[2]; };
  const std::vector<double> times{0.0, 0.25, 0.5, 1.0};
  const auto vec = evaluate(plan, space, [&](const auto& x) {
    std::vector<double> y;
    for (double t : times) y.push_back(f(x, t));
    return y;
  });
  const auto rv = sobol(project(plan, space, vec));
  for (std::size_t t = 0; t < times.size(); ++t) {
    const auto scalar = evaluate(plan, space, [&](const auto& x) { return std::vector<double>{f(x, times[t])}; });
    const auto rs = sobol(project(plan, space, scalar));
    for (std::size_t i = 0; i < 3; ++i) {
      EXPECT_EQ(rv.first[i][t], rs.first[i][0]);
      EXPECT_EQ(rv.total[i][t], rs.total[i][0]);
    }
  }
}

TEST(Project, MissingValuesAndBasisMismatch) {
  const auto space = uniforms(2);
  const auto plan = sampling::quadrature_plan(space, sampling::PceSpec{1});
  std::vector<std::vector<double>> values(plan.grid.size() - 1, std::vector<double>{1.0});
  EXPECT_THROW(project(plan, space, values), MissingRunError);
  std::vector<ParameterDef> other{{"z", ParamKind::real, 0.0, Distribution1D::normal(0, 1)},
                                  space[1]};
  values.push_back({1.0});
  EXPECT_THROW(project(plan, other, values), BasisError);
}

}  // namespace
}  // namespace vvuq::analysis
