#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ergconc/numerics.hpp"

namespace ergconc {

// Decreasing step sequence gamma_k = gamma1 * k^(-theta), k >= 1.
class StepSchedule {
 public:
  StepSchedule(double gamma1, double theta);

  double gamma1() const noexcept { return gamma1_; }
  double theta() const noexcept { return theta_; }

  // Step k (1-based).
  double step(std::uint64_t k) const;

  friend bool operator==(const StepSchedule&, const StepSchedule&) = default;

 private:
  double gamma1_;
  double theta_;
};

// Partial sums Gamma_n^(l) = sum_{k<=n} gamma_k^l for a fixed set of exponents.
class StepSums {
 public:
  StepSums(const StepSchedule& schedule, std::vector<double> exponents);

  std::uint64_t n() const noexcept { return n_; }
  const std::vector<double>& exponents() const noexcept { return exponents_; }

  // Gamma_n^(l); throws DomainError if l is not tracked.
  double sum(double exponent) const;
  double gamma_n() const { return sum(1.0); }

  // Adds step n+1.
  void extend();
  void extend_to(std::uint64_t n);

  friend bool operator==(const StepSums&, const StepSums&) = default;

 private:
  StepSchedule schedule_;
  std::vector<double> exponents_;
  std::vector<CompensatedSum> sums_;
  std::uint64_t n_ = 0;
};

StepSums partial_sums(const StepSchedule& schedule, std::uint64_t n,
                      std::vector<double> exponents = {1.0, 1.5, 2.0});

struct Holder {
  double beta;
};
struct Lipschitz {};
using RegularityMode = std::variant<Holder, Lipschitz>;

RegularityMode holder(double beta);

struct ThetaVerdict {
  bool accepted = false;
  // Admissible range is (lower_bound, upper_bound], lower bound open.
  double lower_bound = 0.0;
  double upper_bound = 1.0;
  std::string message;
};

ThetaVerdict validate_theta(const StepSchedule& schedule, const RegularityMode& mode);

// Constants of the "steps small enough" requirement:
// gamma_k <= min(1 / (2 sqrt(C_V c_bar)), alpha_V / (2 C_V ||D^2 V||_inf)).
struct SmallStepConstants {
  double c_v;
  double c_bar;
  double alpha_v;
  double hessian_v_sup;
};

// Returns a warning when gamma_1 exceeds the admissible step, naming the first
// index from which the schedule complies. Nothing is enforced.
std::optional<std::string> small_step_warning(const StepSchedule& schedule,
                                              const SmallStepConstants& constants);

}  // namespace ergconc
