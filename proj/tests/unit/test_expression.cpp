#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "homoglab/error.hpp"
#include "homoglab/expression.hpp"

using homoglab::Expression;

TEST(Expression, ArithmeticAndPrecedence) {
  EXPECT_DOUBLE_EQ(Expression::parse("1 + 2 * 3")(0, 0), 7.0);
  EXPECT_DOUBLE_EQ(Expression::parse("(1 + 2) * 3")(0, 0), 9.0);
  EXPECT_DOUBLE_EQ(Expression::parse("2 ^ 3 ^ 2")(0, 0), 512.0);
  EXPECT_DOUBLE_EQ(Expression::parse("-2 ^ 2")(0, 0), -4.0);
  EXPECT_DOUBLE_EQ(Expression::parse("8 / 4 / 2")(0, 0), 1.0);
}

TEST(Expression, VariablesAndFunctions) {
  const auto e = Expression::parse("2 + sin(2*pi*y1) * cos(2*pi*y2) + exp(0*y1)");
  const double y1 = 0.1, y2 = 0.3;
  EXPECT_NEAR(e(y1, y2), 2 + std::sin(2 * std::numbers::pi * y1) * std::cos(2 * std::numbers::pi * y2) + 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(Expression::parse("1.5e1")(0, 0), 15.0);
}

TEST(Expression, RejectsMalformedInput) {
  EXPECT_THROW(Expression::parse("1 +"), homoglab::InvalidArgument);
  EXPECT_THROW(Expression::parse("foo(y1)"), homoglab::InvalidArgument);
  EXPECT_THROW(Expression::parse("(1"), homoglab::InvalidArgument);
  EXPECT_THROW(Expression::parse("y3"), homoglab::InvalidArgument);
}
