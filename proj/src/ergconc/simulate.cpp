#include "ergconc/simulate.hpp"

#include <cmath>

#include "ergconc/errors.hpp"
#include "ergconc/parallel.hpp"

namespace ergconc {

namespace {

// generator_apply with drift and sigma already in the workspace.
double cached_generator(const TestFunction& phi, std::span<const double> x, Workspace& ws) {
  const std::size_t d = ws.drift.size();
  const std::size_t r = ws.sigma.size() / d;
  phi.gradient(x, ws.gradient);
  phi.hessian(x, ws.hessian);
  double first = 0.0;
  for (std::size_t i = 0; i < d; ++i) first += ws.drift[i] * ws.gradient[i];
  double trace = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t k = 0; k < d; ++k) {
      double s = 0.0;
      for (std::size_t j = 0; j < r; ++j) s += ws.sigma[i * r + j] * ws.sigma[k * r + j];
      trace += s * ws.hessian[k * d + i];
    }
  }
  return first + 0.5 * trace;
}

double cached_carre(const TestFunction& phi, std::span<const double> x, Workspace& ws) {
  const std::size_t d = ws.drift.size();
  const std::size_t r = ws.sigma.size() / d;
  phi.gradient(x, ws.gradient);
  double total = 0.0;
  for (std::size_t j = 0; j < r; ++j) {
    double c = 0.0;
    for (std::size_t i = 0; i < d; ++i) c += ws.sigma[i * r + j] * ws.gradient[i];
    total += c * c;
  }
  return total;
}

}  // namespace

Observable generator_observable(std::shared_ptr<const TestFunction> phi) {
  return {"generator", ObservableKind::kGenerator,
          [phi = std::move(phi)](std::span<const double> x, Workspace& ws) { return cached_generator(*phi, x, ws); }};
}

Observable carre_observable(std::shared_ptr<const TestFunction> phi) {
  return {"carre", ObservableKind::kCarre,
          [phi = std::move(phi)](std::span<const double> x, Workspace& ws) { return cached_carre(*phi, x, ws); }};
}

Observable sigma_norm2_observable() {
  return {"sigma_norm2", ObservableKind::kSigmaNorm2, [](std::span<const double>, Workspace& ws) {
            double total = 0.0;
            for (double s : ws.sigma) total += s * s;
            return total;
          }};
}

Observable constant_observable(double c) {
  return {"constant", ObservableKind::kConstant, [c](std::span<const double>, Workspace&) { return c; }};
}

Observable function_observable(std::string name, std::function<double(std::span<const double>)> f) {
  return {std::move(name), ObservableKind::kCustom,
          [f = std::move(f)](std::span<const double> x, Workspace&) { return f(x); }};
}

SchemeState initial_state(std::span<const double> x0, std::size_t observable_count) {
  SchemeState state;
  state.x.assign(x0.begin(), x0.end());
  state.observable_sums.resize(observable_count);
  return state;
}

void advance(SchemeState& state, const DiffusionModel& model, const StepSchedule& schedule,
             std::span<const double> u, std::span<const Observable> observables, Workspace& ws,
             double divergence_limit, std::uint64_t replicate) {
  const std::size_t d = model.state_dim();
  const std::size_t r = model.noise_dim();
  const double gamma = schedule.step(state.k + 1);
  const double sqrt_gamma = std::sqrt(gamma);
  model.drift(state.x, ws.drift);
  model.diffusion(state.x, ws.sigma);
  for (std::size_t i = 0; i < observables.size(); ++i) {
    state.observable_sums[i].add(gamma * observables[i].evaluate(state.x, ws));
  }
  double norm2 = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    double noise = 0.0;
    for (std::size_t j = 0; j < r; ++j) noise += ws.sigma[i * r + j] * u[j];
    ws.vec[i] = state.x[i] + gamma * ws.drift[i] + sqrt_gamma * noise;
    norm2 += ws.vec[i] * ws.vec[i];
  }
  state.gamma_sum.add(gamma);
  ++state.k;
  const double norm = std::sqrt(norm2);
  if (!std::isfinite(norm) || norm > divergence_limit) throw DivergenceError(state.k, replicate, norm);
  for (std::size_t i = 0; i < d; ++i) state.x[i] = ws.vec[i];
}

SchemeState step_once(const SchemeState& state, const DiffusionModel& model, const StepSchedule& schedule,
                      std::span<const double> u, std::span<const Observable> observables,
                      double divergence_limit) {
  if (u.size() != model.noise_dim()) throw DomainError("innovation has the wrong dimension");
  if (state.observable_sums.size() != observables.size()) {
    throw DomainError("state tracks a different number of observables");
  }
  SchemeState next = state;
  Workspace ws(model);
  advance(next, model, schedule, u, observables, ws, divergence_limit);
  return next;
}

PathResult run_path(const DiffusionModel& model, const StepSchedule& schedule, std::uint64_t n,
                    std::span<const Observable> observables, ReplicateStream& stream,
                    const PathOptions& options) {
  if (n == 0) throw DomainError("run_path needs n >= 1");
  const std::size_t d = model.state_dim();
  const std::size_t r = model.noise_dim();
  std::vector<double> x0(d);
  if (options.initial.kind == InitialLaw::Kind::kPointMass) {
    if (options.initial.point.size() != d) throw DomainError("initial point has the wrong dimension");
    x0 = options.initial.point;
  } else {
    for (auto& v : x0) v = stream.normal();
  }
  SchemeState state = initial_state(x0, observables.size());
  Workspace ws(model);
  std::vector<double> u(r);
  if (options.trace) options.trace(0, 0.0, state.x);
  for (std::uint64_t k = 0; k < n; ++k) {
    for (auto& v : u) v = stream.draw(options.innovation);
    advance(state, model, schedule, u, observables, ws, options.divergence_limit, stream.replicate());
    if (options.trace) options.trace(state.k, schedule.step(state.k), state.x);
  }
  PathResult result;
  result.n = n;
  result.final_state = state.x;
  result.gamma_n = state.gamma_n();
  result.averages.resize(observables.size());
  for (std::size_t i = 0; i < observables.size(); ++i) {
    result.averages[i] = state.average(i);
    if (observables[i].kind == ObservableKind::kGenerator && !result.deviation) {
      result.deviation = std::sqrt(result.gamma_n) * result.averages[i];
    }
  }
  return result;
}

std::vector<InvariantEstimate> estimate_invariant_averages(const DiffusionModel& model,
                                                           std::span<const Observable> observables,
                                                           const StepSchedule& schedule, std::uint64_t n,
                                                           std::size_t num_paths, std::uint64_t seed,
                                                           const PathOptions& options, unsigned threads) {
  if (num_paths == 0) throw DomainError("need at least one path");
  std::vector<std::vector<double>> averages(num_paths);
  PathOptions path_options = options;
  path_options.trace = nullptr;
  parallel_for(num_paths, threads, [&](std::size_t i) {
    ReplicateStream stream(seed, i);
    averages[i] = run_path(model, schedule, n, observables, stream, path_options).averages;
  });
  std::vector<InvariantEstimate> estimates(observables.size());
  for (std::size_t f = 0; f < observables.size(); ++f) {
    auto& est = estimates[f];
    est.per_path.resize(num_paths);
    CompensatedSum sum;
    for (std::size_t i = 0; i < num_paths; ++i) {
      est.per_path[i] = averages[i][f];
      sum.add(est.per_path[i]);
    }
    est.mean = sum.value() / double(num_paths);
    if (num_paths > 1) {
      CompensatedSum sq;
      for (double v : est.per_path) sq.add((v - est.mean) * (v - est.mean));
      est.standard_error = std::sqrt(sq.value() / double(num_paths - 1) / double(num_paths));
    }
  }
  return estimates;
}

InvariantEstimate estimate_invariant_average(const DiffusionModel& model, const Observable& f,
                                             const StepSchedule& schedule, std::uint64_t n,
                                             std::size_t num_paths, std::uint64_t seed,
                                             const PathOptions& options, unsigned threads) {
  return estimate_invariant_averages(model, std::span<const Observable>(&f, 1), schedule, n, num_paths, seed,
                                     options, threads)
      .front();
}

}  // namespace ergconc
