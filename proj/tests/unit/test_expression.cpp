#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "doctest.h"
#include "ergconc/errors.hpp"
#include "ergconc/expression.hpp"

using namespace ergconc;

namespace {

double eval(const std::string& text, std::vector<double> x) {
  return Expression::parse(text, x.size()).evaluate(x);
}

std::string error_field(const ExpressionModelSpec& spec) {
  try {
    make_expression_bundle(spec, SearchBox::cube(spec.state_dim, -1, 1, 11));
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

}  // namespace

TEST_SUITE("expression") {
  TEST_CASE("evaluation and precedence") {
    CHECK(eval("1 + 2 * 3", {0.0}) == 7.0);
    CHECK(eval("(1 + 2) * 3", {0.0}) == 9.0);
    CHECK(eval("-x^2", {3.0}) == -9.0);
    CHECK(eval("2^3^2", {0.0}) == 512.0);
    CHECK(eval("8 / 4 / 2", {0.0}) == 1.0);
    CHECK(eval("1 - 2 - 3", {0.0}) == -4.0);
    CHECK(eval("pow(x, 3)", {2.0}) == doctest::Approx(8.0));
    CHECK(eval("cos(pi)", {0.0}) == doctest::Approx(-1.0));
    CHECK(eval("exp(1) - e", {0.0}) == doctest::Approx(0.0));
    CHECK(eval("tanh(x)", {0.5}) == doctest::Approx(std::tanh(0.5)));
    CHECK(eval("1.5e-1 * x1 + x_2", {2.0, 1.0}) == doctest::Approx(1.3));
    CHECK(eval("sin(x2) * x1", {3.0, 0.5}) == doctest::Approx(3.0 * std::sin(0.5)));
  }

  TEST_CASE("parse errors") {
    CHECK_THROWS_AS(Expression::parse("cos(", 1), ConfigError);
    CHECK_THROWS_AS(Expression::parse("1 +", 1), ConfigError);
    CHECK_THROWS_AS(Expression::parse("foo(x)", 1), ConfigError);
    CHECK_THROWS_AS(Expression::parse("y", 1), ConfigError);
    CHECK_THROWS_AS(Expression::parse("x3", 2), ConfigError);
    CHECK_THROWS_AS(Expression::parse("x0", 2), ConfigError);
    CHECK_THROWS_AS(Expression::parse("x", 2), ConfigError);
    CHECK_THROWS_AS(Expression::parse("1 2", 1), ConfigError);
    CHECK_THROWS_AS(Expression::parse("", 1), ConfigError);
    CHECK_THROWS_AS(Expression::parse("pow(x)", 1), ConfigError);
    CHECK_THROWS_AS(Expression::parse("(x", 1), ConfigError);
  }

  TEST_CASE("symbolic derivatives match finite differences") {
    const char* cases[] = {"cos(x1) * sin(x2)", "exp(-x1^2 / 2) + x2", "tanh(x1 * x2)", "pow(x1, 3) - x2 / (1 + x1^2)",
                           "pow(1 + x1^2, 0.5 * x2)", "-x1 / 2 + 3", "x2^4"};
    const std::vector<double> x = {0.37, -1.21};
    for (const char* text : cases) {
      const Expression f = Expression::parse(text, 2);
      for (std::size_t v = 0; v < 2; ++v) {
        const double h = 1e-6;
        std::vector<double> up = x, down = x;
        up[v] += h;
        down[v] -= h;
        const double fd = (f.evaluate(up) - f.evaluate(down)) / (2 * h);
        CAPTURE(text);
        CAPTURE(v);
        CHECK(f.derivative(v).evaluate(x) == doctest::Approx(fd).epsilon(1e-7));
      }
    }
  }

  TEST_CASE("second derivatives") {
    const Expression f = Expression::parse("cos(x)", 1);
    const std::vector<double> x = {0.8};
    CHECK(f.derivative(0).derivative(0).evaluate(x) == doctest::Approx(-std::cos(0.8)).epsilon(1e-15));
    CHECK(Expression::parse("x^3", 1).derivative(0).derivative(0).evaluate(x) == doctest::Approx(6 * 0.8));
    CHECK_THROWS_AS(f.derivative(1), DomainError);
  }

  TEST_CASE("printing round-trips") {
    const Expression f = Expression::parse("cos(x1) * (x2 - 2) / 3", 2);
    const Expression g = Expression::parse(f.to_string(), 2);
    const std::vector<double> x = {0.1, 0.9};
    CHECK(g.evaluate(x) == f.evaluate(x));
  }

  TEST_CASE("expression model reproduces the built-in model") {
    ExpressionModelSpec spec;
    spec.drift = {"-x/2"};
    spec.diffusion = {{"cos(x)"}};
    spec.phi = "cos(x)";
    const ModelBundle inline_bundle = make_expression_bundle(spec, SearchBox::cube(1, -10, 10, 20001));
    const ModelBundle builtin = builtin_cosine_model();
    CHECK_FALSE(inline_bundle.model->lower_trust());
    for (double x0 : {-3.0, -0.4, 0.0, 1.0, 2.5}) {
      const double x[] = {x0};
      CHECK(generator_apply(*inline_bundle.model, *inline_bundle.phi, x) ==
            doctest::Approx(generator_apply(*builtin.model, *builtin.phi, x)).epsilon(1e-14));
      CHECK(carre_source(*inline_bundle.model, *inline_bundle.phi, x) ==
            doctest::Approx(carre_source(*builtin.model, *builtin.phi, x)).epsilon(1e-14));
    }
    const ConfluenceEstimate est = estimate_confluence_alpha(*inline_bundle.model, 1.5, inline_bundle.box);
    CHECK(std::fabs(est.alpha - 0.25) <= 1e-9);
  }

  TEST_CASE("expression model errors name the field") {
    ExpressionModelSpec spec;
    spec.drift = {"-x/2"};
    spec.diffusion = {{"cos(x)"}};
    spec.phi = "cos(x)";
    ExpressionModelSpec bad = spec;
    bad.drift = {"-x/"};
    CHECK(error_field(bad) == "model.drift[0]");
    bad = spec;
    bad.diffusion = {{"cosh(x)"}};
    CHECK(error_field(bad) == "model.diffusion[0][0]");
    bad = spec;
    bad.phi = "z";
    CHECK(error_field(bad) == "model.phi");
  }
}
