#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "ergconc/errors.hpp"
#include "ergconc/model.hpp"

using namespace ergconc;

namespace {

std::shared_ptr<const DiffusionModel> linear_2d() {
  // b(x) = -x, sigma = 0.5 I
  FunctionModelSpec spec;
  spec.state_dim = 2;
  spec.noise_dim = 2;
  spec.drift = [](std::span<const double> x, std::span<double> out) {
    out[0] = -x[0];
    out[1] = -x[1];
  };
  spec.diffusion = [](std::span<const double>, std::span<double> out) {
    out[0] = 0.5, out[1] = 0.0, out[2] = 0.0, out[3] = 0.5;
  };
  return make_function_model(spec);
}

}  // namespace

TEST_SUITE("model") {
  TEST_CASE("generator on the cosine model") {
    const ModelBundle m = builtin_cosine_model();
    const double x[] = {1.0};
    CHECK(generator_apply(*m.model, *m.phi, x) ==
          doctest::Approx(std::sin(1.0) / 2.0 - std::pow(std::cos(1.0), 3) / 2.0).epsilon(1e-15));
    CHECK(generator_apply(*m.model, *m.phi, x) == doctest::Approx(0.34187118977845154).epsilon(1e-14));
    const double zero[] = {0.0};
    CHECK(generator_apply(*m.model, *m.phi, zero) == doctest::Approx(-0.5));
  }

  TEST_CASE("carre du champ source") {
    const ModelBundle m = builtin_cosine_model();
    const double x[] = {1.0};
    CHECK(carre_source(*m.model, *m.phi, x) == doctest::Approx(0.20670545260795149).epsilon(1e-14));
    Workspace ws(*m.model);
    CHECK(sigma_norm2(*m.model, x, ws) == doctest::Approx(std::cos(1.0) * std::cos(1.0)));
  }

  TEST_CASE("test function derivatives match finite differences") {
    const ModelBundle m = builtin_cosine_model();
    for (double x0 : {-2.0, -0.3, 0.7, 1.9}) {
      const double h = 1e-5;
      const double xp[] = {x0 + h}, xm[] = {x0 - h}, x[] = {x0};
      double g[1], hs[1], gp[1], gm[1];
      m.phi->gradient(x, g);
      m.phi->hessian(x, hs);
      CHECK(g[0] == doctest::Approx((m.phi->value(xp) - m.phi->value(xm)) / (2 * h)).epsilon(1e-8));
      m.phi->gradient(xp, gp);
      m.phi->gradient(xm, gm);
      CHECK(hs[0] == doctest::Approx((gp[0] - gm[0]) / (2 * h)).epsilon(1e-8));
    }
  }

  TEST_CASE("generator of a 2-d linear model") {
    const auto model = linear_2d();
    // phi = x1^2 + 3 x1 x2: A phi = -2x1^2 - 6 x1 x2 + 0.25
    FunctionTestSpec t;
    t.dim = 2;
    t.value = [](std::span<const double> x) { return x[0] * x[0] + 3 * x[0] * x[1]; };
    t.gradient = [](std::span<const double> x, std::span<double> g) {
      g[0] = 2 * x[0] + 3 * x[1];
      g[1] = 3 * x[0];
    };
    t.hessian = [](std::span<const double>, std::span<double> h) { h[0] = 2, h[1] = 3, h[2] = 3, h[3] = 0; };
    const auto phi = make_function_test(t);
    const double x[] = {0.4, -1.1};
    CHECK(generator_apply(*model, *phi, x) == doctest::Approx(-2 * 0.16 - 6 * 0.4 * -1.1 + 0.25).epsilon(1e-14));
    // |sigma^* grad phi|^2 = 0.25 (g1^2 + g2^2)
    const double g1 = 0.8 - 3.3, g2 = 1.2;
    CHECK(carre_source(*model, *phi, x) == doctest::Approx(0.25 * (g1 * g1 + g2 * g2)).epsilon(1e-14));
  }

  TEST_CASE("confluence constant of the cosine model") {
    const ModelBundle m = builtin_cosine_model();
    // form = xi^2 (-1/2 + (p-1) sin^2(x) / 2), so alpha = (2 - p) / 2
    const ConfluenceEstimate a32 = estimate_confluence_alpha(*m.model, 1.5, m.box);
    CHECK(a32.certified);
    CHECK(std::fabs(a32.alpha - 0.25) <= 1e-9);
    REQUIRE(a32.argmax.size() == 1);
    CHECK(std::fabs(std::sin(a32.argmax[0])) == doctest::Approx(1.0).epsilon(1e-6));

    const ConfluenceEstimate a1 = estimate_confluence_alpha(*m.model, 1.0, m.box);
    CHECK(a1.certified);
    CHECK(std::fabs(a1.alpha - 0.5) <= 1e-9);

    const ConfluenceEstimate a2 = estimate_confluence_alpha(*m.model, 2.0, m.box);
    CHECK_FALSE(a2.certified);
    CHECK(std::fabs(a2.alpha) <= 1e-9);
  }

  TEST_CASE("confluence form pointwise") {
    const ModelBundle m = builtin_cosine_model();
    const double x[] = {0.3}, xi[] = {2.0};
    const double s2 = std::sin(0.3) * std::sin(0.3);
    CHECK(confluence_form(*m.model, x, xi, 1.5) == doctest::Approx(4.0 * (-0.5 + 0.25 * s2)).epsilon(1e-14));
    const double zero[] = {0.0};
    CHECK_THROWS_AS(confluence_form(*m.model, x, zero, 1.5), DomainError);
  }

  TEST_CASE("confluence of a 2-d model") {
    // Db = -I, constant sigma: alpha = 1 for every p
    const auto fd = with_finite_difference_jacobians(linear_2d());
    CHECK(fd->lower_trust());
    const ConfluenceEstimate est = estimate_confluence_alpha(*fd, 1.5, SearchBox::cube(2, -2, 2, 41));
    CHECK(est.certified);
    CHECK(est.alpha == doctest::Approx(1.0).epsilon(1e-6));
    CHECK_THROWS_AS(estimate_confluence_alpha(*linear_2d(), 1.5, SearchBox::cube(2, -2, 2, 41)), DomainError);
  }

  TEST_CASE("finite-difference jacobians agree with the analytic ones") {
    const ModelBundle m = builtin_cosine_model();
    const auto fd = with_finite_difference_jacobians(m.model);
    for (double x0 : {-1.3, 0.2, 2.2}) {
      const double x[] = {x0};
      double a[1], b[1];
      m.model->diffusion_column_jacobian(x, 0, a);
      fd->diffusion_column_jacobian(x, 0, b);
      CHECK(b[0] == doctest::Approx(a[0]).epsilon(1e-7));
      m.model->drift_jacobian(x, a);
      fd->drift_jacobian(x, b);
      CHECK(b[0] == doctest::Approx(a[0]).epsilon(1e-7));
    }
    const ConfluenceEstimate est = estimate_confluence_alpha(*fd, 1.5, m.box);
    CHECK(est.alpha == doctest::Approx(0.25).epsilon(1e-6));
  }

  TEST_CASE("grid supremum and Lipschitz constant") {
    const SearchBox box = SearchBox::cube(1, -10, 10, 2001);
    const SupremumResult s = grid_supremum([](std::span<const double> x) { return std::sin(x[0]); }, box);
    CHECK(s.value == doctest::Approx(1.0).epsilon(1e-12));
    const double lip = grid_lipschitz([](std::span<const double> x) { return std::sin(2 * x[0]) / 3; }, box);
    CHECK(lip == doctest::Approx(2.0 / 3.0).epsilon(1e-6));
    const ModelBundle m = builtin_cosine_model();
    Workspace ws(*m.model);
    const double source_lip =
        grid_lipschitz([&](std::span<const double> x) { return carre_source(*m.model, *m.phi, x, ws); }, m.box);
    CHECK(source_lip == doctest::Approx(*m.source_lip).epsilon(1e-6));
  }

  TEST_CASE("theta Lipschitz bound") {
    CHECK(theta_lipschitz_bound(0.5, 0.25) == 2.0);
    CHECK_THROWS_AS(theta_lipschitz_bound(0.5, 0.0), DomainError);
    CHECK_THROWS_AS(theta_lipschitz_bound(-1.0, 0.25), DomainError);
  }

  TEST_CASE("built-in bundle") {
    const ModelBundle m = find_model("cosine-ou");
    CHECK(m.name == "cosine-ou");
    CHECK(*m.sigma_sup == 1.0);
    CHECK(*m.grad_phi_sup == 1.0);
    CHECK(*m.source_lip == 0.5);
    CHECK(registered_models() == std::vector<std::string>{"cosine-ou"});
    CHECK_THROWS_AS(find_model("cosine"), ConfigError);
  }

  TEST_CASE("proxy validation") {
    VarianceProxies p{0.1515, 0.4171, 1.0, 1.0, 2.0, 0.25, 1.5};
    CHECK_NOTHROW(p.validate());
    p.nu_carre = -1.0;
    CHECK_THROWS_AS(p.validate(), DomainError);
    p = VarianceProxies{0.1515, 0.4171, 1.0, 1.0, 2.0, 0.0, 1.5};
    CHECK_THROWS_AS(p.validate(), DomainError);
  }
}
