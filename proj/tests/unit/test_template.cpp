#include <gtest/gtest.h>

#include "vvuq/campaign/template.hpp"
#include "vvuq/core/numeric_format.hpp"

namespace vvuq::campaign {
namespace {

std::string lookup(std::string_view name) {
  if (name == "infection_rate") return format_double(0.07);
  if (name == "b") return "B";
  throw EncodingError("unknown " + std::string(name));
}

TEST(Template, Substitutes) {
  EXPECT_EQ(render("rate=$infection_rate\n", '$', lookup), "rate=0.07\n");
  EXPECT_EQ(render("$b$b-$b", '$', lookup), "BB-B");
  EXPECT_EQ(render("no placeholders", '$', lookup), "no placeholders");
}

TEST(Template, Escape) {
  EXPECT_EQ(render("cost $$5 and $$$b", '$', lookup), "cost $5 and $B");
  EXPECT_EQ(render("%b %% $x", '%', lookup), "B % $x");
}

TEST(Template, StrayDelimiter) {
  EXPECT_THROW(render("price $5", '$', lookup), EncodingError);
  EXPECT_THROW(render("trailing $", '$', lookup), EncodingError);
  EXPECT_THROW(render("$unknown", '$', lookup), EncodingError);
}

TEST(Template, PlaceholderNames) {
  const auto names = placeholders("$a_1 $$not $b $a_1\n$_c");
  EXPECT_EQ(names, (std::set<std::string>{"a_1", "b", "_c"}));
}

TEST(Template, ShortestRoundTrip) {
  const double v = 0.1 + 0.2;
  const std::string text = render("$v", '$', [&](std::string_view) { return format_double(v); });
  EXPECT_EQ(text, "0.30000000000000004");
  EXPECT_EQ(parse_double(text), v);
}

}  // namespace
}  // namespace vvuq::campaign
