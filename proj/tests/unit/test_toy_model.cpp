#include <gtest/gtest.h>

#include "vvuq/core/errors.hpp"
#include "vvuq/driver/toy_model.hpp"

namespace vvuq::driver {
namespace {

TEST(ToyModel, InfectionRateBoundsDominate) {
  ToyParams lo, hi;
  lo.infection_rate = 0.0035;
  hi.infection_rate = 0.14;
  const auto a = toy_model(lo), b = toy_model(hi);
  ASSERT_EQ(a.size(), 180u);
  for (std::size_t t = 0; t < a.size(); ++t) EXPECT_GE(b[t], a[t]) << "day " << t + 1;
  EXPECT_GT(b.back(), 100.0 * a.back());
}

TEST(ToyModel, MonotoneInInfectionRateOverGrid) {
  std::vector<double> prev;
  for (int k = 0; k <= 40; ++k) {
    ToyParams p;
    p.infection_rate = 0.0035 + (0.14 - 0.0035) * k / 40.0;
    const auto d = toy_model(p);
    if (!prev.empty()) {
      for (std::size_t t = 0; t < d.size(); ++t) ASSERT_GE(d[t], prev[t]) << "k " << k << " day " << t + 1;
    }
    prev = d;
  }
}

TEST(ToyModel, NonDecreasingInTime) {
  for (auto variant : {ToyVariant::epidemic, ToyVariant::additive})
    for (double noise : {0.0, 0.3}) {
      ToyOptions o;
      o.variant = variant;
      o.noise = noise;
      o.seed = 11;
      const auto d = toy_model(ToyParams{}, o);
      for (std::size_t t = 1; t < d.size(); ++t) ASSERT_GE(d[t], d[t - 1]);
    }
}

TEST(ToyModel, HorizonZeroIsEmpty) {
  ToyOptions o;
  o.horizon = 0;
  EXPECT_TRUE(toy_model(ToyParams{}, o).empty());
  EXPECT_EQ(toy_csv({}), "t,dead\n");
}

TEST(ToyModel, DeterministicGivenSeed) {
  ToyOptions o;
  o.noise = 0.2;
  o.seed = 5;
  EXPECT_EQ(toy_model(ToyParams{}, o), toy_model(ToyParams{}, o));
  auto o2 = o;
  o2.seed = 6;
  EXPECT_NE(toy_model(ToyParams{}, o), toy_model(ToyParams{}, o2));
}

TEST(ToyModel, RecoveryPeriodDoesNotMoveDeaths) {
  ToyParams a, b;
  a.recovery_period = 4;
  b.recovery_period = 16;
  EXPECT_EQ(toy_model(a), toy_model(b));
}

TEST(ToyModel, ParamsFromJsonClampAndReject) {
  std::vector<std::string> warnings;
  const auto p = toy_params_from_json({{"infection_rate", 0.5}, {"incubation_period", 3.5}}, &warnings);
  EXPECT_EQ(p.infection_rate, 0.14);
  EXPECT_EQ(p.incubation_period, 3.5);
  EXPECT_EQ(p.mortality_period, 8.0);
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("infection_rate"), std::string::npos);
  EXPECT_THROW(toy_params_from_json({{"bogus", 1}}), ConfigError);
  EXPECT_THROW(toy_params_from_json({{"infection_rate", "x"}}), ConfigError);
}

TEST(ToyModel, CsvLayout) {
  EXPECT_EQ(toy_csv({0.5, 2}), "t,dead\n1,0.5\n2,2\n");
}

}  // namespace
}  // namespace vvuq::driver
