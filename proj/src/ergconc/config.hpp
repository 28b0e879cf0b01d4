#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ergconc/bounds.hpp"
#include "ergconc/model.hpp"
#include "ergconc/montecarlo.hpp"
#include "ergconc/rng.hpp"
#include "ergconc/simulate.hpp"
#include "ergconc/steps.hpp"

namespace ergconc {

inline constexpr std::string_view kBuiltinModelName = "cosine-ou";

// Evenly spaced deviation levels min, ..., max.
struct AGrid {
  double min = 0.0;
  double max = 2.0;
  std::size_t count = 41;

  std::vector<double> values() const;

  friend bool operator==(const AGrid&, const AGrid&) = default;
};

// User model given by coefficient expressions over x1..xd.
struct InlineModel {
  std::size_t dim = 1;
  std::size_t noise_dim = 1;
  std::vector<std::string> drift;
  std::vector<std::vector<std::string>> diffusion;
  std::string phi;
  std::vector<double> box_min;
  std::vector<double> box_max;
  std::size_t points_per_dim = 2001;

  friend bool operator==(const InlineModel&, const InlineModel&) = default;
};

struct RegularityConfig {
  bool lipschitz = false;
  double beta = 1.0;  // Holder exponent, ignored in Lipschitz mode

  friend bool operator==(const RegularityConfig&, const RegularityConfig&) = default;
};

struct ProxyOverrides {
  std::optional<double> nu_carre;
  std::optional<double> nu_sigma2;
  std::optional<double> sigma_sup;
  std::optional<double> grad_phi_sup;
  std::optional<double> theta_lip;
  std::optional<double> alpha;
  double p_confluence = 1.5;

  friend bool operator==(const ProxyOverrides&, const ProxyOverrides&) = default;
};

// Empty path means "not written" (or stdout for the primary output of a command).
struct OutputPaths {
  std::string deviations;
  std::string bounds;
  std::string figure_csv;
  std::string figure_svg;
  std::string trace;
  std::string proxies;

  friend bool operator==(const OutputPaths&, const OutputPaths&) = default;
};

struct ExperimentConfig {
  std::string model{kBuiltinModelName};
  std::optional<InlineModel> inline_model;
  RegularityConfig regularity;
  double gamma1 = 1.0;
  double theta = 1.0 / 3.0 + 1e-3;
  InnovationLaw innovation = InnovationLaw::kStandardGaussian;
  InitialLaw initial = InitialLaw::standard_normal();
  std::uint64_t n = 50'000;
  std::uint64_t mc = 10'000;
  AGrid a_grid;
  std::uint64_t seed = 20'240'101;
  std::size_t rho_grid_steps = kDefaultRhoGridSteps;
  BoundTuning tuning;
  ProxyOverrides proxies;
  std::string proxies_file;  // JSON object of proxy values, read when set
  std::size_t carre_paths = 20;
  double divergence_limit = kDefaultDivergenceLimit;
  unsigned threads = 0;
  OutputPaths outputs;

  StepSchedule schedule() const { return StepSchedule(gamma1, theta); }
  RegularityMode regularity_mode() const;
  // "cosine-ou" or "inline".
  std::string model_name() const;
  ExperimentMetadata metadata() const;
  PathOptions path_options() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

// Missing fields take their defaults; unknown fields are rejected. Throws
// ConfigError naming the offending field.
ExperimentConfig parse_config(std::string_view json_text);
// Throws IoError when the file cannot be read.
ExperimentConfig load_config(const std::string& path);
// Complete JSON document; parse_config(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& config);

// Checks the invariants needed before running: theta admissible for the
// declared regularity, sane counts. Throws ConfigError.
void validate_for_run(const ExperimentConfig& config);

ModelBundle build_model(const ExperimentConfig& config);

struct ResolvedProxies {
  VarianceProxies values;
  std::vector<std::string> estimated;  // names of the fields computed rather than given
  std::optional<InvariantEstimate> carre;
  std::optional<InvariantEstimate> sigma2;
  std::optional<ConfluenceEstimate> confluence;
  double source_lip = 0.0;
};

// Fills every proxy not overridden in the config or the proxies file:
// nu values by ergodic averages over carre_paths paths, suprema by grid search
// over the model box, alpha by the confluence estimate, [theta]_1 = L / alpha.
ResolvedProxies resolve_proxies(const ExperimentConfig& config, const ModelBundle& bundle, unsigned threads);

// The ergodic-average part of resolve_proxies, always estimated.
struct CarreEstimates {
  InvariantEstimate carre;
  InvariantEstimate sigma2;
};
CarreEstimates estimate_carre(const ExperimentConfig& config, const ModelBundle& bundle, unsigned threads);

std::string proxies_to_json(const VarianceProxies& proxies);

}  // namespace ergconc
