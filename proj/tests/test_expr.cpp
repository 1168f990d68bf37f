#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "guichard/expr.hpp"

using namespace guichard;

TEST(Expr, ArithmeticAndPrecedence) {
  EXPECT_DOUBLE_EQ(Expr::parse("1 + 2*3").eval(0), 7.0);
  EXPECT_DOUBLE_EQ(Expr::parse("(1 + 2)*3").eval(0), 9.0);
  EXPECT_DOUBLE_EQ(Expr::parse("2^3^2").eval(0), 512.0);  // right associative
  EXPECT_DOUBLE_EQ(Expr::parse("-2^2").eval(0), -4.0);
  EXPECT_DOUBLE_EQ(Expr::parse("8/4/2").eval(0), 1.0);
  EXPECT_DOUBLE_EQ(Expr::parse("1e-3*1000").eval(0), 1.0);
}

TEST(Expr, FunctionsMatchStd) {
  const double x = 0.37, y = 1.2;
  EXPECT_NEAR(Expr::parse("exp(x)*sin(y) + log(1+x^2) - sqrt(y)/cos(x)").eval(x, y),
              std::exp(x) * std::sin(y) + std::log(1 + x * x) - std::sqrt(y) / std::cos(x), 1e-15);
  EXPECT_NEAR(Expr::parse("atan(x) + tan(y/3)").eval(x, y), std::atan(x) + std::tan(y / 3), 1e-15);
  EXPECT_NEAR(Expr::parse("pi/4").eval(0), std::numbers::pi / 4, 1e-16);
}

TEST(Expr, DerivativesThroughJetsAreExact) {
  const Expr e = Expr::parse("1/(4*x^2)");
  const auto f = e.univariate(0);
  const Jet u = Jet::variable(1, 3, 0, 0.7);
  const Jet r = f(u);
  EXPECT_NEAR(r.value(), 1 / (4 * 0.49), 1e-15);
  EXPECT_NEAR(r.partial({1, 0, 0}), -1 / (2 * std::pow(0.7, 3)), 1e-13);
  EXPECT_NEAR(r.partial({2, 0, 0}), 3 / (2 * std::pow(0.7, 4)), 1e-12);
}

TEST(Expr, UnivariateRejectsOtherVariables) {
  EXPECT_NO_THROW(Expr::parse("1+y^2").univariate(1));
  EXPECT_THROW(Expr::parse("1+y^2").univariate(0), ExprError);
  EXPECT_NO_THROW(Expr::parse("3").univariate(0));
}

TEST(Expr, FieldOfTwoVariables) {
  const ScalarField f = Expr::parse("x*y + sin(x)").field(2);
  EXPECT_NEAR(f.dx().dy().value_at({0.3, 0.4, 0}), 1.0, 1e-15);
  EXPECT_NEAR(f.dx(2).value_at({0.3, 0.4, 0}), -std::sin(0.3), 1e-15);
  EXPECT_THROW(Expr::parse("z").field(2), ExprError);
}

TEST(Expr, SyntaxErrorsAreReported) {
  EXPECT_THROW(Expr::parse(""), ExprError);
  EXPECT_THROW(Expr::parse("1 +"), ExprError);
  EXPECT_THROW(Expr::parse("(x"), ExprError);
  EXPECT_THROW(Expr::parse("foo(x)"), ExprError);
  EXPECT_THROW(Expr::parse("x y"), ExprError);
  EXPECT_THROW(Expr::parse("sin x"), ExprError);
}

TEST(Expr, TextIsKept) { EXPECT_EQ(Expr::parse("1+x^2").text(), "1+x^2"); }
