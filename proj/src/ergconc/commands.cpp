#include "ergconc/commands.hpp"

#include <cmath>
#include <ostream>

#include "json.hpp"

#include "ergconc/errors.hpp"
#include "ergconc/numerics.hpp"
#include "ergconc/output.hpp"
#include "ergconc/rng.hpp"

namespace ergconc {

using nlohmann::json;

namespace {

unsigned thread_count(const ExperimentConfig& config, const CommandOptions& options) {
  return options.threads.value_or(config.threads);
}

const std::string& choose(const std::string& override_path, const std::string& configured) {
  return override_path.empty() ? configured : override_path;
}

json estimate_json(const InvariantEstimate& e) {
  return json{{"mean", e.mean}, {"standard_error", e.standard_error}, {"paths", e.per_path.size()}};
}

std::string with_csv_suffix(const std::string& path) {
  const auto slash = path.find_last_of('/');
  const auto dot = path.find_last_of('.');
  if (dot != std::string::npos && (slash == std::string::npos || dot > slash)) return path.substr(0, dot) + ".csv";
  return path + ".csv";
}

}  // namespace

MomentCheck check_innovation_moments(InnovationLaw law, std::uint64_t seed, std::uint64_t samples) {
  if (samples < 2) throw DomainError("moment check needs at least two samples");
  MomentCheck check;
  check.samples = samples;
  // Variances of U^k, used for 5-standard-error tolerances.
  double spread[4];
  if (law == InnovationLaw::kStandardGaussian) {
    check.expected[3] = 3.0;
    spread[0] = 1.0, spread[1] = 2.0, spread[2] = 15.0, spread[3] = 96.0;
  } else {
    check.expected[3] = 1.0;
    spread[0] = 1.0, spread[1] = 0.0, spread[2] = 1.0, spread[3] = 0.0;
  }
  ReplicateStream stream(seed, 0);
  CompensatedSum sums[4];
  for (std::uint64_t i = 0; i < samples; ++i) {
    const double u = stream.draw(law);
    const double u2 = u * u;
    sums[0].add(u);
    sums[1].add(u2);
    sums[2].add(u2 * u);
    sums[3].add(u2 * u2);
  }
  check.ok = true;
  for (int k = 0; k < 4; ++k) {
    check.moments[k] = sums[k].value() / double(samples);
    check.tolerance[k] = 5.0 * std::sqrt(spread[k] / double(samples)) + 1e-12;
    if (!(std::fabs(check.moments[k] - check.expected[k]) <= check.tolerance[k])) check.ok = false;
  }
  return check;
}

std::string CheckReport::to_json() const {
  json j;
  j["model"] = model;
  j["p"] = p;
  j["alpha"] = confluence.alpha;
  j["certified"] = confluence.certified;
  j["argmax"] = confluence.argmax;
  j["source_lipschitz"] = source_lip;
  j["theta_lip"] = theta_lip ? json(*theta_lip) : json(nullptr);
  j["theta"] = json{{"accepted", theta.accepted},
                    {"lower_bound", theta.lower_bound},
                    {"upper_bound", theta.upper_bound},
                    {"message", theta.message}};
  json moments = json::array();
  for (int k = 0; k < 4; ++k) {
    moments.push_back(json{{"order", k + 1},
                           {"empirical", innovation.moments[k]},
                           {"expected", innovation.expected[k]},
                           {"tolerance", innovation.tolerance[k]}});
  }
  j["innovation"] = json{{"samples", innovation.samples}, {"moments", moments}, {"ok", innovation.ok}};
  return j.dump(2) + "\n";
}

std::string CarreReport::to_json() const {
  json j;
  j["n"] = n;
  j["paths"] = paths;
  j["nu_carre"] = estimate_json(carre);
  j["nu_sigma2"] = estimate_json(sigma2);
  j["proxies"] = json::parse(proxies_to_json(proxies));
  return j.dump(2) + "\n";
}

CheckReport run_check(const ExperimentConfig& config) {
  const ModelBundle bundle = build_model(config);
  CheckReport report;
  report.model = config.model_name();
  report.p = config.proxies.p_confluence;
  report.confluence = estimate_confluence_alpha(*bundle.model, report.p, bundle.box);
  if (bundle.source_lip) {
    report.source_lip = *bundle.source_lip;
  } else {
    Workspace ws(*bundle.model);
    report.source_lip = grid_lipschitz(
        [&](std::span<const double> x) { return carre_source(*bundle.model, *bundle.phi, x, ws); }, bundle.box);
  }
  if (report.confluence.certified) report.theta_lip = theta_lipschitz_bound(report.source_lip, report.confluence.alpha);
  report.theta = validate_theta(config.schedule(), config.regularity_mode());
  report.innovation = check_innovation_moments(config.innovation, config.seed);
  return report;
}

CarreReport run_carre(const ExperimentConfig& config, unsigned threads) {
  validate_for_run(config);
  const ModelBundle bundle = build_model(config);
  CarreEstimates estimates = estimate_carre(config, bundle, threads);
  ExperimentConfig resolved = config;
  resolved.proxies.nu_carre = estimates.carre.mean;
  resolved.proxies.nu_sigma2 = estimates.sigma2.mean;
  CarreReport report;
  report.n = config.n;
  report.paths = config.carre_paths;
  report.proxies = resolve_proxies(resolved, bundle, threads).values;
  report.carre = std::move(estimates.carre);
  report.sigma2 = std::move(estimates.sigma2);
  return report;
}

DeviationCurve run_deviations(const ExperimentConfig& config, unsigned threads) {
  validate_for_run(config);
  const ModelBundle bundle = build_model(config);
  const std::vector<double> samples = sample_deviations(*bundle.model, bundle.phi, config.schedule(), config.n,
                                                        config.mc, RngPolicy{config.seed}, config.path_options(),
                                                        threads);
  const std::vector<double> grid = config.a_grid.values();
  return deviation_curve(samples, grid, config.metadata());
}

BoundsResult run_bounds(const ExperimentConfig& config, unsigned threads) {
  validate_for_run(config);
  const ModelBundle bundle = build_model(config);
  BoundsResult result;
  result.proxies = resolve_proxies(config, bundle, threads).values;
  result.gamma_n = partial_sums(config.schedule(), config.n, {1.0}).gamma_n();
  const BoundParams params = BoundParams::from_proxies(result.gamma_n, result.proxies, config.tuning);
  const std::vector<double> grid = config.a_grid.values();
  result.rows = bound_curves(params, result.proxies, grid, config.rho_grid_steps, threads);
  return result;
}

FigureResult run_figure(const ExperimentConfig& config, unsigned threads) {
  FigureResult result;
  result.curve = run_deviations(config, threads);
  result.bounds = run_bounds(config, threads);
  result.svg = render_figure_svg(result.curve, result.bounds.rows);
  return result;
}

CheckReport cmd_check(const ExperimentConfig& config, const CommandOptions& options) {
  CheckReport report = run_check(config);
  write_output(options.out, options.console, [&](std::ostream& out) { out << report.to_json(); });
  if (!report.theta.accepted) throw ConfigError("theta", report.theta.message);
  return report;
}

CarreReport cmd_carre(const ExperimentConfig& config, const CommandOptions& options) {
  CarreReport report = run_carre(config, thread_count(config, options));
  write_output(options.out, options.console, [&](std::ostream& out) { out << report.to_json(); });
  if (!config.outputs.proxies.empty()) {
    write_output(config.outputs.proxies, nullptr, [&](std::ostream& out) { out << proxies_to_json(report.proxies); });
  }
  return report;
}

DeviationCurve cmd_deviations(const ExperimentConfig& config, const CommandOptions& options) {
  DeviationCurve curve = run_deviations(config, thread_count(config, options));
  write_output(choose(options.out, config.outputs.deviations), options.console,
               [&](std::ostream& out) { write_deviation_csv(out, curve); });
  return curve;
}

BoundsResult cmd_bounds(const ExperimentConfig& config, const CommandOptions& options) {
  BoundsResult result = run_bounds(config, thread_count(config, options));
  write_output(choose(options.out, config.outputs.bounds), options.console,
               [&](std::ostream& out) { write_bound_csv(out, result.rows, config.metadata()); });
  return result;
}

FigureResult cmd_figure(const ExperimentConfig& config, const CommandOptions& options) {
  FigureResult result = run_figure(config, thread_count(config, options));
  const std::string& svg_path = choose(options.out, config.outputs.figure_svg);
  std::string csv_path = config.outputs.figure_csv;
  if (csv_path.empty() && !svg_path.empty()) csv_path = with_csv_suffix(svg_path);
  if (!csv_path.empty()) {
    write_output(csv_path, nullptr,
                 [&](std::ostream& out) { write_figure_csv(out, result.curve, result.bounds.rows); });
  }
  if (!config.outputs.deviations.empty()) {
    write_output(config.outputs.deviations, nullptr,
                 [&](std::ostream& out) { write_deviation_csv(out, result.curve); });
  }
  if (!config.outputs.bounds.empty()) {
    write_output(config.outputs.bounds, nullptr,
                 [&](std::ostream& out) { write_bound_csv(out, result.bounds.rows, config.metadata()); });
  }
  write_output(svg_path, options.console, [&](std::ostream& out) { out << result.svg; });
  return result;
}

PathResult cmd_simulate(const ExperimentConfig& config, const CommandOptions& options) {
  validate_for_run(config);
  const ModelBundle bundle = build_model(config);
  const std::vector<Observable> observables{generator_observable(bundle.phi), carre_observable(bundle.phi),
                                            sigma_norm2_observable()};
  PathResult result;
  write_output(choose(options.out, config.outputs.trace), options.console, [&](std::ostream& out) {
    TraceWriter writer(out, bundle.model->state_dim(), config.metadata());
    PathOptions path_options = config.path_options();
    path_options.trace = [&](std::uint64_t k, double gamma_k, std::span<const double> x) { writer(k, gamma_k, x); };
    ReplicateStream stream = RngPolicy{config.seed}.stream(0);
    result = run_path(*bundle.model, config.schedule(), config.n, observables, stream, path_options);
  });
  return result;
}

}  // namespace ergconc
