#include "ergconc/steps.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ergconc/errors.hpp"

namespace ergconc {

StepSchedule::StepSchedule(double gamma1, double theta) : gamma1_(gamma1), theta_(theta) {
  if (!(gamma1 > 0.0) || !std::isfinite(gamma1)) {
    throw DomainError("gamma1 must be a positive finite number");
  }
  if (!(theta > 0.0 && theta <= 1.0)) {
    throw DomainError("theta must lie in (0, 1]");
  }
}

double StepSchedule::step(std::uint64_t k) const {
  if (k == 0) throw DomainError("step index is 1-based");
  if (k == 1) return gamma1_;
  return gamma1_ * std::pow(static_cast<double>(k), -theta_);
}

StepSums::StepSums(const StepSchedule& schedule, std::vector<double> exponents)
    : schedule_(schedule), exponents_(std::move(exponents)), sums_(exponents_.size()) {
  for (double l : exponents_) {
    if (!(l > 0.0)) throw DomainError("step-sum exponents must be positive");
  }
}

double StepSums::sum(double exponent) const {
  for (std::size_t i = 0; i < exponents_.size(); ++i) {
    if (exponents_[i] == exponent) return sums_[i].value();
  }
  throw DomainError("exponent " + std::to_string(exponent) + " is not tracked");
}

void StepSums::extend() {
  ++n_;
  const double g = schedule_.step(n_);
  for (std::size_t i = 0; i < exponents_.size(); ++i) {
    const double l = exponents_[i];
    sums_[i].add(l == 1.0 ? g : std::pow(g, l));
  }
}

void StepSums::extend_to(std::uint64_t n) {
  while (n_ < n) extend();
}

StepSums partial_sums(const StepSchedule& schedule, std::uint64_t n, std::vector<double> exponents) {
  if (n == 0) throw DomainError("partial sums need n >= 1");
  StepSums sums(schedule, std::move(exponents));
  sums.extend_to(n);
  return sums;
}

RegularityMode holder(double beta) {
  if (!(beta > 0.0 && beta <= 1.0)) throw DomainError("Holder exponent beta must lie in (0, 1]");
  return Holder{beta};
}

ThetaVerdict validate_theta(const StepSchedule& schedule, const RegularityMode& mode) {
  ThetaVerdict verdict;
  std::string label;
  if (const auto* h = std::get_if<Holder>(&mode)) {
    verdict.lower_bound = 1.0 / (2.0 + h->beta);
    label = "Holder(beta=" + format_double(h->beta) + ")";
  } else {
    verdict.lower_bound = 0.5;
    label = "Lipschitz";
  }
  const double theta = schedule.theta();
  verdict.accepted = theta > verdict.lower_bound && theta <= verdict.upper_bound;
  const std::string prefix = "theta=" + format_double(theta);
  if (verdict.accepted) {
    verdict.message = prefix + " accepted for " + label + ": in (" + format_double(verdict.lower_bound) + ", 1]";
  } else if (theta <= verdict.lower_bound) {
    verdict.message = prefix + " rejected for " + label + ": must exceed the open bound " +
                      format_double(verdict.lower_bound);
  } else {
    verdict.message = prefix + " rejected for " + label + ": must not exceed 1";
  }
  return verdict;
}

std::optional<std::string> small_step_warning(const StepSchedule& schedule,
                                              const SmallStepConstants& c) {
  if (!(c.c_v > 0.0 && c.c_bar > 0.0 && c.alpha_v > 0.0)) {
    throw DomainError("small-step constants C_V, c_bar, alpha_V must be positive");
  }
  double limit = 1.0 / (2.0 * std::sqrt(c.c_v * c.c_bar));
  if (c.hessian_v_sup > 0.0) {
    limit = std::min(limit, c.alpha_v / (2.0 * c.c_v * c.hessian_v_sup));
  }
  if (schedule.gamma1() <= limit) return std::nullopt;
  // gamma1 k^-theta <= limit  <=>  k >= (gamma1 / limit)^(1/theta)
  auto k = static_cast<std::uint64_t>(std::ceil(std::pow(schedule.gamma1() / limit, 1.0 / schedule.theta())));
  while (k > 1 && schedule.step(k - 1) <= limit) --k;
  while (schedule.step(k) > limit) ++k;
  std::ostringstream msg;
  msg.precision(10);
  msg << "gamma1=" << schedule.gamma1() << " exceeds the admissible step " << limit
      << "; the schedule complies from k=" << k;
  return msg.str();
}

}  // namespace ergconc
