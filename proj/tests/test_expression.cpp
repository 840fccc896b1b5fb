#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fractura/expression.hpp"

using fractura::Expression;
using fractura::ValidationError;

TEST_CASE("expression: arithmetic and precedence") {
  CHECK(Expression::parse("2+3*4")(0, 0) == 14.0);
  CHECK(Expression::parse("(2+3)*4")(0, 0) == 20.0);
  CHECK(Expression::parse("2^3^2")(0, 0) == 512.0);  // right-associative
  CHECK(Expression::parse("-x^2")(3, 0) == -9.0);
  CHECK(Expression::parse("10/4")(0, 0) == 2.5);
  CHECK(Expression::parse("1 - 2 - 3")(0, 0) == -4.0);
}

TEST_CASE("expression: variables, constants, functions") {
  CHECK(Expression::parse("2*y-1")(0.0, 0.75) == 0.5);
  CHECK(Expression::parse("sin(pi/2)")(0, 0) == Catch::Approx(1.0).margin(1e-15));
  CHECK(Expression::parse("sqrt(x*x+y*y)")(3, 4) == 5.0);
  CHECK(Expression::parse("atan2(y,x)")(1, 1) == Catch::Approx(std::atan2(1.0, 1.0)));
  CHECK(Expression::parse("max(x, y)")(2, 7) == 7.0);
  CHECK(Expression::parse("exp(0)")(0, 0) == 1.0);
  CHECK(Expression::parse("1.5e2")(0, 0) == 150.0);
}

TEST_CASE("expression: parse errors name the position") {
  CHECK_THROWS_AS(Expression::parse("2*"), ValidationError);
  CHECK_THROWS_AS(Expression::parse("foo(1)"), ValidationError);
  CHECK_THROWS_AS(Expression::parse("sin 1"), ValidationError);
  CHECK_THROWS_AS(Expression::parse("(1+2"), ValidationError);
  CHECK_THROWS_AS(Expression::parse("1+2)"), ValidationError);
  CHECK_THROWS_WITH(Expression::parse("2*#"), Catch::Matchers::ContainsSubstring("position"));
}
