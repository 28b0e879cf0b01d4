#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ergconc/model.hpp"
#include "ergconc/simulate.hpp"
#include "ergconc/steps.hpp"

namespace ergconc {

// Replicate i draws from ReplicateStream(master_seed, i).
struct RngPolicy {
  std::uint64_t master_seed = 0;
  ReplicateStream stream(std::uint64_t replicate) const { return ReplicateStream(master_seed, replicate); }
};

// sqrt(Gamma_n) nu_n(A phi) for each of `mc` independent paths, in replicate order.
std::vector<double> sample_deviations(const DiffusionModel& model, std::shared_ptr<const TestFunction> phi,
                                      const StepSchedule& schedule, std::uint64_t n, std::uint64_t mc,
                                      const RngPolicy& policy, const PathOptions& options = {},
                                      unsigned threads = 0);

struct DeviationRow {
  double a = 0.0;
  std::uint64_t exceed_count = 0;
  std::uint64_t mc = 0;
  double p_hat = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::optional<double> g_n;  // ln p_hat; empty when no replicate exceeds a

  // Half-width of the CI mapped to the log scale, max over both sides.
  std::optional<double> log_half_width() const;
};

struct ExperimentMetadata {
  std::uint64_t n = 0;
  double theta = 0.0;
  double gamma1 = 0.0;
  std::uint64_t mc = 0;
  std::uint64_t seed = 0;
  std::string model;

  // "n=..,theta=..,gamma1=..,mc=..,seed=..,model=.." with round-trip precision.
  std::string describe() const;
  // FNV-1a of describe().
  std::uint64_t experiment_id() const;

  friend bool operator==(const ExperimentMetadata&, const ExperimentMetadata&) = default;
};

struct DeviationCurve {
  std::vector<DeviationRow> rows;
  ExperimentMetadata metadata;
};

// Counts #{i : |deviation_i| >= a} per grid point, with 95% Clopper-Pearson intervals.
DeviationCurve deviation_curve(std::span<const double> samples, std::span<const double> a_grid,
                               ExperimentMetadata metadata = {});

}  // namespace ergconc
