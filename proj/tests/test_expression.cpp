#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "tshift/expression.hpp"

using namespace tshift;
using Env = std::map<std::string, double>;

TEST_CASE("parses the coefficient expressions of the bundled example") {
  SECTION("Q component with the alternating integer power") {
    const auto q =
        Expression::parse("(1/8)*( intpow(-1, ln(t)/ln(sqrt(2))) + u1 )");
    CHECK(q.root()->kind == Expression::Kind::binary);
    CHECK(q.root()->op == '*');
    // at t = 4 the exponent is 4, so the sign is +1
    CHECK(q.evaluate({{"t", 4.0}, {"u1", 3.0}}) == Catch::Approx(0.5));
    // at t = 2 the exponent is 2
    CHECK(q.evaluate({{"t", 2.0}, {"u1", 0.0}}) == Catch::Approx(0.125));
  }

  SECTION("single variable") {
    const auto t = Expression::parse("t");
    CHECK(t.root()->kind == Expression::Kind::variable);
    CHECK(t.root()->name == "t");
  }

  SECTION("G component with the sine factor") {
    const auto g =
        Expression::parse("1/(8*t) * sin( (ln(t)/ln(sqrt(2))) * pi ) * x1");
    // the sine vanishes at powers of 2 up to rounding
    CHECK(std::abs(g.evaluate({{"t", 2.0}, {"x1", 1.0}})) < 1e-14);
    CHECK(std::abs(g.evaluate({{"t", 8.0}, {"x1", -2.5}})) < 1e-13);
  }
}

TEST_CASE("precedence and associativity") {
  const Env env;
  CHECK(Expression::parse("2+3*4").evaluate(env) == 14.0);
  CHECK(Expression::parse("2*3+4").evaluate(env) == 10.0);
  CHECK(Expression::parse("6/3/2").evaluate(env) == 1.0);
  CHECK(Expression::parse("2^3^2").evaluate(env) == 512.0);  // right-associative
  CHECK(Expression::parse("2^-2").evaluate(env) == 0.25);
  CHECK(Expression::parse("5--3").evaluate(env) == 8.0);
  CHECK(Expression::parse("pi").evaluate(env) == M_PI);
  CHECK(Expression::parse("e").evaluate(env) == M_E);
  CHECK(Expression::parse("1.5e-3").evaluate(env) == 1.5e-3);

  SECTION("unary minus binds tighter than the power operator") {
    CHECK(Expression::parse("-2^2").evaluate(env) == 4.0);
    CHECK(Expression::parse("-t^2").evaluate({{"t", 3.0}}) == 9.0);
    CHECK(Expression::parse("-(t^2)").evaluate({{"t", 3.0}}) == -9.0);
  }
}

TEST_CASE("parse errors carry positions") {
  SECTION("dangling operator") {
    try {
      Expression::parse("2 +");
      FAIL("expected SyntaxError");
    } catch (const SyntaxError& e) {
      CHECK(e.line == 1);
      CHECK(e.column == 4);
    }
  }

  SECTION("unknown function") {
    CHECK_THROWS_AS(Expression::parse("foo(1)"), UnknownIdentifierError);
  }

  SECTION("wrong arity") {
    CHECK_THROWS_AS(Expression::parse("sin(1,2)"), ArityError);
    CHECK_THROWS_AS(Expression::parse("pow(2)"), ArityError);
  }

  SECTION("unbalanced parentheses and trailing junk") {
    CHECK_THROWS_AS(Expression::parse("(1+2"), SyntaxError);
    CHECK_THROWS_AS(Expression::parse("1 2"), SyntaxError);
    CHECK_THROWS_AS(Expression::parse("1..2"), SyntaxError);
  }

  SECTION("multi-line positions") {
    try {
      Expression::parse("1 +\n *2");
      FAIL("expected SyntaxError");
    } catch (const SyntaxError& e) {
      CHECK(e.line == 2);
      CHECK(e.column == 2);
    }
  }
}

TEST_CASE("evaluation domain errors") {
  const Env env = {{"t", 1.0}};
  CHECK_THROWS_AS(Expression::parse("ln(0-1)").evaluate(env), EvalDomainError);
  CHECK_THROWS_AS(Expression::parse("ln(0)").evaluate(env), EvalDomainError);
  CHECK_THROWS_AS(Expression::parse("1/(t-1)").evaluate(env), EvalDomainError);
  CHECK_THROWS_AS(Expression::parse("sqrt(0-4)").evaluate(env), EvalDomainError);
  CHECK_THROWS_AS(Expression::parse("intpow(2, 0.5)").evaluate(env), EvalDomainError);
  CHECK_THROWS_AS(Expression::parse("(0-8)^(1/3)").evaluate(env), EvalDomainError);
  CHECK_THROWS_AS(Expression::parse("0^(0-1)").evaluate(env), EvalDomainError);
  CHECK_THROWS_AS(Expression::parse("y+1").evaluate(env), UnknownIdentifierError);

  SECTION("intpow accepts near-integer exponents") {
    CHECK(Expression::parse("intpow(-1, 2.0000000001)").evaluate(env) == 1.0);
    CHECK(Expression::parse("intpow(-1, 3)").evaluate(env) == -1.0);
  }

  SECTION("variable whitelisting") {
    const auto e = Expression::parse("x1 + u2*t");
    CHECK_NOTHROW(e.check_variables({"t", "x1", "u1", "x2", "u2"}));
    CHECK_THROWS_AS(e.check_variables({"t", "u1", "u2"}), UnknownIdentifierError);
  }
}

TEST_CASE("serialization round-trips") {
  const std::vector<std::string> corpus = {
      "(1/8)*( intpow(-1, ln(t)/ln(sqrt(2))) + u1 )",
      "1/(8*t) * sin( (ln(t)/ln(sqrt(2))) * pi ) * x1",
      "-t^2",
      "-(t^2)",
      "a-(b-c)",
      "a-b-c",
      "2^-3^2",
      "0.1*u2 + 0.125*intpow(-1, ln(t)/ln(2))",
      "abs(sign(t)-2)^2",
      "pow(t, 0.5) + sqrt(t)",
      "1.5e-3*t + 2.25",
  };
  for (const auto& src : corpus) {
    INFO(src);
    const auto first = Expression::parse(src);
    const std::string printed = first.to_string();
    const auto second = Expression::parse(printed);
    CHECK(second.same_structure(first));
    CHECK(second.to_string() == printed);  // printing is idempotent
  }
}
