#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ergconc/model.hpp"
#include "ergconc/numerics.hpp"
#include "ergconc/rng.hpp"
#include "ergconc/steps.hpp"

namespace ergconc {

enum class ObservableKind { kGenerator, kCarre, kSigmaNorm2, kConstant, kCustom };

// f evaluated at the pre-step state. On entry ws.drift and ws.sigma hold b(x)
// and sigma(x); evaluate must leave them untouched.
struct Observable {
  std::string name;
  ObservableKind kind = ObservableKind::kCustom;
  std::function<double(std::span<const double> x, Workspace& ws)> evaluate;
};

// A phi, the normalized-deviation observable.
Observable generator_observable(std::shared_ptr<const TestFunction> phi);
// |sigma^* grad phi|^2
Observable carre_observable(std::shared_ptr<const TestFunction> phi);
// ||sigma||^2
Observable sigma_norm2_observable();
Observable constant_observable(double c);
Observable function_observable(std::string name, std::function<double(std::span<const double>)> f);

struct InitialLaw {
  enum class Kind { kStandardNormal, kPointMass };
  Kind kind = Kind::kStandardNormal;
  std::vector<double> point;

  static InitialLaw standard_normal() { return {}; }
  static InitialLaw point_mass(std::vector<double> x) { return {Kind::kPointMass, std::move(x)}; }

  friend bool operator==(const InitialLaw&, const InitialLaw&) = default;
};

inline constexpr double kDefaultDivergenceLimit = 1e12;

struct SchemeState {
  std::uint64_t k = 0;
  std::vector<double> x;
  CompensatedSum gamma_sum;
  std::vector<CompensatedSum> observable_sums;

  double gamma_n() const noexcept { return gamma_sum.value(); }
  // nu_k(f_i)
  double average(std::size_t i) const { return observable_sums.at(i).value() / gamma_sum.value(); }
};

SchemeState initial_state(std::span<const double> x0, std::size_t observable_count);

// One step of X_{k+1} = X_k + gamma_{k+1} b(X_k) + sqrt(gamma_{k+1}) sigma(X_k) U_{k+1},
// accumulating gamma_{k+1} f_i(X_k). Throws DivergenceError when the new state is
// non-finite or its norm exceeds `divergence_limit`.
void advance(SchemeState& state, const DiffusionModel& model, const StepSchedule& schedule,
             std::span<const double> u, std::span<const Observable> observables, Workspace& ws,
             double divergence_limit = kDefaultDivergenceLimit, std::uint64_t replicate = 0);

// Value form of advance().
SchemeState step_once(const SchemeState& state, const DiffusionModel& model, const StepSchedule& schedule,
                      std::span<const double> u, std::span<const Observable> observables = {},
                      double divergence_limit = kDefaultDivergenceLimit);

struct PathOptions {
  InnovationLaw innovation = InnovationLaw::kStandardGaussian;
  InitialLaw initial = InitialLaw::standard_normal();
  double divergence_limit = kDefaultDivergenceLimit;
  // Called with (k, gamma_k, X_k) for k = 0..n; gamma_0 is reported as 0.
  std::function<void(std::uint64_t, double, std::span<const double>)> trace;
};

struct PathResult {
  std::uint64_t n = 0;
  std::vector<double> final_state;
  double gamma_n = 0.0;
  std::vector<double> averages;       // nu_n(f_i)
  std::optional<double> deviation;    // sqrt(Gamma_n) nu_n(A phi)
};

PathResult run_path(const DiffusionModel& model, const StepSchedule& schedule, std::uint64_t n,
                    std::span<const Observable> observables, ReplicateStream& stream,
                    const PathOptions& options = {});

struct InvariantEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  std::vector<double> per_path;
};

// Mean over independent paths of nu_n(f_i), one estimate per observable.
// Path i uses ReplicateStream(seed, i).
std::vector<InvariantEstimate> estimate_invariant_averages(const DiffusionModel& model,
                                                           std::span<const Observable> observables,
                                                           const StepSchedule& schedule, std::uint64_t n,
                                                           std::size_t num_paths, std::uint64_t seed,
                                                           const PathOptions& options = {},
                                                           unsigned threads = 0);

InvariantEstimate estimate_invariant_average(const DiffusionModel& model, const Observable& f,
                                             const StepSchedule& schedule, std::uint64_t n,
                                             std::size_t num_paths, std::uint64_t seed,
                                             const PathOptions& options = {}, unsigned threads = 0);

}  // namespace ergconc
