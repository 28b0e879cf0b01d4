#include <cmath>
#include <numbers>
#include <variant>

#include "doctest.h"
#include "ergconc/errors.hpp"
#include "ergconc/steps.hpp"

using namespace ergconc;

TEST_SUITE("steps") {
  TEST_CASE("step values") {
    CHECK(StepSchedule(1.0, 1.0).step(4) == 0.25);
    CHECK(StepSchedule(1.0, 0.77).step(1) == 1.0);
    CHECK(StepSchedule(2.5, 0.4).step(1) == 2.5);

    const double theta = 1.0 / 3.0 + 1e-3;
    const long double oracle = std::exp(-static_cast<long double>(theta) * std::log(50000.0L));
    CHECK(StepSchedule(1.0, theta).step(50000) == doctest::Approx(static_cast<double>(oracle)).epsilon(1e-15));
    // high-precision value of 50000^-theta
    CHECK(StepSchedule(1.0, theta).step(50000) == doctest::Approx(0.026852065335053555).epsilon(1e-14));
  }

  TEST_CASE("step is non-increasing") {
    const StepSchedule s(1.3, 0.6);
    for (std::uint64_t k = 1; k < 5000; ++k) CHECK(s.step(k + 1) < s.step(k));
  }

  TEST_CASE("schedule validation") {
    CHECK_THROWS_AS(StepSchedule(0.0, 0.5), DomainError);
    CHECK_THROWS_AS(StepSchedule(-1.0, 0.5), DomainError);
    CHECK_THROWS_AS(StepSchedule(1.0, 0.0), DomainError);
    CHECK_THROWS_AS(StepSchedule(1.0, 1.5), DomainError);
    CHECK_NOTHROW(StepSchedule(1.0, 1.0));
    CHECK_THROWS_AS(StepSchedule(1.0, 0.5).step(0), DomainError);
  }

  TEST_CASE("harmonic partial sum") {
    const StepSums sums = partial_sums(StepSchedule(1.0, 1.0), 3, {1.0});
    CHECK(sums.gamma_n() == doctest::Approx(11.0 / 6.0).epsilon(1e-15));
  }

  TEST_CASE("sum of squares approaches pi^2/6") {
    const std::uint64_t n = 1'000'000;
    const StepSums sums = partial_sums(StepSchedule(1.0, 1.0), n, {2.0});
    // Euler-Maclaurin tail of sum_{k>n} k^-2
    const double nd = static_cast<double>(n);
    const double tail = 1.0 / nd - 1.0 / (2.0 * nd * nd) + 1.0 / (6.0 * nd * nd * nd);
    CHECK(sums.sum(2.0) == doctest::Approx(std::numbers::pi * std::numbers::pi / 6.0 - tail).epsilon(1e-14));
    CHECK(sums.sum(2.0) == doctest::Approx(1.6449330668487264).epsilon(1e-14));
  }

  TEST_CASE("Gamma_n for the default experiment") {
    const double theta = 1.0 / 3.0 + 1e-3;
    const StepSums sums = partial_sums(StepSchedule(1.0, theta), 50000);
    // high-precision Hurwitz-zeta evaluation of sum_{k<=n} k^-theta
    CHECK(sums.gamma_n() == doctest::Approx(2015.9681866564226).epsilon(1e-13));
    CHECK(sums.sum(1.5) == doctest::Approx(439.87400644553131).epsilon(1e-13));
    CHECK(sums.sum(2.0) == doctest::Approx(106.34268201233989).epsilon(1e-13));
    const double root = std::sqrt(sums.gamma_n());
    CHECK(root > 10.0);
    CHECK(root < 100.0);
  }

  TEST_CASE("incremental extension equals batch") {
    const StepSchedule s(0.7, 0.55);
    StepSums inc(s, {1.0, 1.5, 2.0});
    for (int i = 0; i < 777; ++i) inc.extend();
    inc.extend_to(12345);
    const StepSums batch = partial_sums(s, 12345);
    CHECK(inc == batch);
    CHECK(inc.n() == 12345);
    CHECK_THROWS_AS((void)batch.sum(3.0), DomainError);
  }

  TEST_CASE("Gamma^(3/2) / Gamma decreases") {
    const StepSchedule s(1.0, 1.0 / 3.0 + 1e-3);
    StepSums sums(s, {1.0, 1.5});
    double previous = 1e300;
    std::uint64_t n = 1000;
    for (; n <= 1'000'000; n *= 2) {
      sums.extend_to(n);
      const double ratio = sums.sum(1.5) / sums.gamma_n();
      CHECK(ratio < previous);
      previous = ratio;
    }
    // integral approximation of both sums at the last n
    const double t = s.theta();
    const double last = static_cast<double>(n / 2);
    const double approx = (std::pow(last, 1 - 1.5 * t) / (1 - 1.5 * t)) / (std::pow(last, 1 - t) / (1 - t));
    CHECK(previous == doctest::Approx(approx).epsilon(0.01));
  }

  TEST_CASE("theta validation") {
    const double theta = 1.0 / 3.0 + 1e-3;
    CHECK(validate_theta(StepSchedule(1.0, theta), holder(1.0)).accepted);
    const ThetaVerdict low = validate_theta(StepSchedule(1.0, 0.3), holder(1.0));
    CHECK_FALSE(low.accepted);
    CHECK(low.lower_bound == doctest::Approx(1.0 / 3.0));
    CHECK(low.message.find("rejected") != std::string::npos);
    const ThetaVerdict edge = validate_theta(StepSchedule(1.0, 0.5), Lipschitz{});
    CHECK_FALSE(edge.accepted);
    CHECK(edge.lower_bound == 0.5);
    CHECK(validate_theta(StepSchedule(1.0, 0.5000001), Lipschitz{}).accepted);
    CHECK(validate_theta(StepSchedule(1.0, 1.0), Lipschitz{}).accepted);
    CHECK(validate_theta(StepSchedule(1.0, 0.41), holder(0.5)).accepted);
    CHECK_FALSE(validate_theta(StepSchedule(1.0, 0.4), holder(0.5)).accepted);
    CHECK_THROWS_AS(holder(0.0), DomainError);
    CHECK_THROWS_AS(holder(1.5), DomainError);
  }

  TEST_CASE("small-step warning") {
    const SmallStepConstants c{1.0, 1.0, 1.0, 1.0};
    // admissible step min(1/2, 1/2) = 1/2
    CHECK_FALSE(small_step_warning(StepSchedule(0.5, 0.5), c).has_value());
    const auto warning = small_step_warning(StepSchedule(1.0, 0.5), c);
    REQUIRE(warning.has_value());
    // 1 * k^-1/2 <= 1/2 from k = 4
    CHECK(warning->find("k=4") != std::string::npos);
    CHECK_THROWS_AS(small_step_warning(StepSchedule(1.0, 0.5), {0.0, 1.0, 1.0, 1.0}), DomainError);
  }
}
