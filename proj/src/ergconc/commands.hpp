#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ergconc/bounds.hpp"
#include "ergconc/config.hpp"
#include "ergconc/model.hpp"
#include "ergconc/montecarlo.hpp"
#include "ergconc/simulate.hpp"
#include "ergconc/steps.hpp"

namespace ergconc {

struct CommandOptions {
  std::string out;                 // overrides the primary output path of the command
  std::optional<unsigned> threads; // overrides config.threads; 0 means auto
  std::ostream* console = nullptr; // receives reports and outputs without a path
};

struct MomentCheck {
  std::uint64_t samples = 0;
  double moments[4] = {0, 0, 0, 0};   // empirical E[U], E[U^2], E[U^3], E[U^4]
  double expected[4] = {0, 1, 0, 0};
  double tolerance[4] = {0, 0, 0, 0};
  bool ok = false;
};

MomentCheck check_innovation_moments(InnovationLaw law, std::uint64_t seed, std::uint64_t samples = 1'000'000);

struct CheckReport {
  std::string model;
  double p = 1.5;
  ConfluenceEstimate confluence;
  double source_lip = 0.0;
  std::optional<double> theta_lip;  // only when alpha is certified
  ThetaVerdict theta;
  MomentCheck innovation;

  std::string to_json() const;
};

struct CarreReport {
  std::uint64_t n = 0;
  std::size_t paths = 0;
  InvariantEstimate carre;
  InvariantEstimate sigma2;
  VarianceProxies proxies;  // fully resolved, with the two estimates above

  std::string to_json() const;
};

struct BoundsResult {
  double gamma_n = 0.0;
  VarianceProxies proxies;
  std::vector<BoundCurveRow> rows;
};

struct FigureResult {
  DeviationCurve curve;
  BoundsResult bounds;
  std::string svg;
};

// Computations only.
CheckReport run_check(const ExperimentConfig& config);
CarreReport run_carre(const ExperimentConfig& config, unsigned threads);
DeviationCurve run_deviations(const ExperimentConfig& config, unsigned threads);
BoundsResult run_bounds(const ExperimentConfig& config, unsigned threads);
FigureResult run_figure(const ExperimentConfig& config, unsigned threads);

// Computations plus output files. Each writes its primary output to
// options.out, else to the configured path, else to options.console.
//   check       JSON report; throws ConfigError after writing when theta is rejected
//   carre       JSON report; resolved proxies to outputs.proxies when set
//   deviations  deviation CSV
//   bounds      bound-curve CSV
//   figure      SVG, plus the joined CSV (outputs.figure_csv or the SVG path with a .csv suffix)
//   simulate    trajectory trace CSV of replicate 0
CheckReport cmd_check(const ExperimentConfig& config, const CommandOptions& options);
CarreReport cmd_carre(const ExperimentConfig& config, const CommandOptions& options);
DeviationCurve cmd_deviations(const ExperimentConfig& config, const CommandOptions& options);
BoundsResult cmd_bounds(const ExperimentConfig& config, const CommandOptions& options);
FigureResult cmd_figure(const ExperimentConfig& config, const CommandOptions& options);
PathResult cmd_simulate(const ExperimentConfig& config, const CommandOptions& options);

}  // namespace ergconc
