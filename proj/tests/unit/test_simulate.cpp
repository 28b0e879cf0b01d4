#include <cmath>
#include <vector>

#include "doctest.h"
#include "ergconc/errors.hpp"
#include "ergconc/simulate.hpp"
#include "reference.hpp"

using namespace ergconc;

TEST_SUITE("simulate") {
  TEST_CASE("trajectory equals the straight-line reference bit for bit") {
    const ModelBundle m = builtin_cosine_model();
    const StepSchedule schedule(1.0, 1.0 / 3.0 + 1e-3);
    const std::vector<Observable> obs{generator_observable(m.phi), carre_observable(m.phi), sigma_norm2_observable()};
    for (std::uint64_t rep : {0u, 1u, 17u}) {
      std::vector<double> states;
      PathOptions options;
      options.trace = [&](std::uint64_t, double, std::span<const double> x) { states.push_back(x[0]); };
      ReplicateStream stream(99, rep);
      const PathResult got = run_path(*m.model, schedule, 500, obs, stream, options);
      const reference::CosinePath want = reference::cosine_path(99, rep, 1.0, 1.0 / 3.0 + 1e-3, 500, true);
      CHECK(states == want.states);
      CHECK(got.gamma_n == want.gamma_n);
      REQUIRE(got.deviation.has_value());
      CHECK(*got.deviation == want.deviation);
      CHECK(got.averages[1] == want.carre);
      CHECK(got.averages[2] == want.sigma2);
    }
  }

  TEST_CASE("observables are taken at the pre-step state") {
    const ModelBundle m = builtin_cosine_model();
    const StepSchedule schedule(0.5, 0.6);
    const std::vector<Observable> obs{function_observable("x", [](std::span<const double> x) { return x[0]; })};
    PathOptions options;
    options.initial = InitialLaw::point_mass({0.7});
    ReplicateStream stream(3, 0);
    const PathResult one = run_path(*m.model, schedule, 1, obs, stream, options);
    // nu_1(f) = f(X_0), not f(X_1)
    CHECK(one.averages[0] == 0.7);
    CHECK(one.final_state[0] != 0.7);

    std::vector<double> xs;
    options.trace = [&](std::uint64_t, double, std::span<const double> x) { xs.push_back(x[0]); };
    ReplicateStream again(3, 0);
    const PathResult three = run_path(*m.model, schedule, 3, obs, again, options);
    const double g1 = schedule.step(1), g2 = schedule.step(2), g3 = schedule.step(3);
    CHECK(three.averages[0] ==
          doctest::Approx((g1 * xs[0] + g2 * xs[1] + g3 * xs[2]) / (g1 + g2 + g3)).epsilon(1e-15));
  }

  TEST_CASE("constant observable averages to exactly one") {
    const ModelBundle m = builtin_cosine_model();
    const InvariantEstimate e =
        estimate_invariant_average(*m.model, constant_observable(1.0), StepSchedule(1.0, 0.4), 3000, 5, 11);
    CHECK(e.mean == 1.0);
    for (double v : e.per_path) CHECK(v == 1.0);
    CHECK(e.standard_error == 0.0);
  }

  TEST_CASE("single step by hand") {
    const ModelBundle m = builtin_cosine_model();
    const StepSchedule schedule(0.25, 0.5);
    const double x0[] = {0.3};
    const double u[] = {1.2};
    const std::vector<Observable> obs{sigma_norm2_observable()};
    const SchemeState s0 = initial_state(x0, 1);
    const SchemeState s1 = step_once(s0, *m.model, schedule, u, obs);
    CHECK(s1.k == 1);
    CHECK(s1.x[0] == doctest::Approx(0.3 + 0.25 * (-0.15) + 0.5 * std::cos(0.3) * 1.2).epsilon(1e-15));
    CHECK(s1.gamma_n() == 0.25);
    CHECK(s1.average(0) == doctest::Approx(std::cos(0.3) * std::cos(0.3)).epsilon(1e-15));
    const double wrong[] = {1.0, 2.0};
    CHECK_THROWS_AS(step_once(s0, *m.model, schedule, wrong, obs), DomainError);
  }

  TEST_CASE("divergence is reported") {
    FunctionModelSpec spec;
    spec.drift = [](std::span<const double> x, std::span<double> out) { out[0] = 3.0 * x[0]; };
    spec.diffusion = [](std::span<const double>, std::span<double> out) { out[0] = 1.0; };
    const auto model = make_function_model(spec);
    ReplicateStream stream(1, 4);
    try {
      run_path(*model, StepSchedule(1.0, 0.5), 10000, {}, stream);
      FAIL("expected divergence");
    } catch (const DivergenceError& e) {
      CHECK(e.replicate() == 4);
      CHECK(e.step() > 1);
      CHECK(e.status() == Status::kDivergence);
    }
    PathOptions options;
    options.divergence_limit = 5.0;
    options.initial = InitialLaw::point_mass({10.0});
    ReplicateStream s2(1, 0);
    CHECK_THROWS_AS(run_path(*builtin_cosine_model().model, StepSchedule(0.01, 0.5), 3, {}, s2, options),
                    DivergenceError);
  }

  TEST_CASE("estimates do not depend on the worker count") {
    const ModelBundle m = builtin_cosine_model();
    const std::vector<Observable> obs{carre_observable(m.phi), sigma_norm2_observable()};
    const StepSchedule schedule(1.0, 0.4);
    const auto one = estimate_invariant_averages(*m.model, obs, schedule, 2000, 9, 5, {}, 1);
    const auto four = estimate_invariant_averages(*m.model, obs, schedule, 2000, 9, 5, {}, 4);
    for (std::size_t i = 0; i < obs.size(); ++i) {
      CHECK(one[i].per_path == four[i].per_path);
      CHECK(one[i].mean == four[i].mean);
    }
  }

  TEST_CASE("Bernoulli innovations stay on the lattice of the scheme") {
    const ModelBundle m = builtin_cosine_model();
    PathOptions options;
    options.innovation = InnovationLaw::kSymmetrizedBernoulli;
    options.initial = InitialLaw::point_mass({0.0});
    ReplicateStream stream(8, 0);
    std::vector<double> xs;
    options.trace = [&](std::uint64_t, double, std::span<const double> x) { xs.push_back(x[0]); };
    run_path(*m.model, StepSchedule(1.0, 0.5), 1, {}, stream, options);
    // X_1 = 0 + 1 * 0 + 1 * cos(0) * (+-1)
    CHECK(std::fabs(xs[1]) == 1.0);
  }
}
