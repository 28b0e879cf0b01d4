#include "ergconc/montecarlo.hpp"

#include <algorithm>
#include <cmath>

#include "ergconc/errors.hpp"
#include "ergconc/numerics.hpp"
#include "ergconc/parallel.hpp"
#include "ergconc/stats.hpp"

namespace ergconc {

std::vector<double> sample_deviations(const DiffusionModel& model, std::shared_ptr<const TestFunction> phi,
                                      const StepSchedule& schedule, std::uint64_t n, std::uint64_t mc,
                                      const RngPolicy& policy, const PathOptions& options, unsigned threads) {
  if (n == 0) throw DomainError("n must be >= 1");
  if (mc == 0) throw DomainError("mc must be >= 1");
  const Observable generator = generator_observable(std::move(phi));
  PathOptions path_options = options;
  path_options.trace = nullptr;
  std::vector<double> deviations(mc);
  parallel_for(mc, threads, [&](std::size_t i) {
    ReplicateStream stream = policy.stream(i);
    deviations[i] = *run_path(model, schedule, n, std::span<const Observable>(&generator, 1), stream, path_options)
                         .deviation;
  });
  return deviations;
}

std::optional<double> DeviationRow::log_half_width() const {
  if (exceed_count == 0) return std::nullopt;
  const double up = std::log(ci_high) - std::log(p_hat);
  const double down = std::log(p_hat) - std::log(ci_low);
  return std::max(up, down);
}

std::string ExperimentMetadata::describe() const {
  return "n=" + std::to_string(n) + ",theta=" + format_double(theta) + ",gamma1=" + format_double(gamma1) +
         ",mc=" + std::to_string(mc) + ",seed=" + std::to_string(seed) + ",model=" + model;
}

std::uint64_t ExperimentMetadata::experiment_id() const {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : describe()) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

DeviationCurve deviation_curve(std::span<const double> samples, std::span<const double> a_grid,
                               ExperimentMetadata metadata) {
  if (a_grid.empty()) throw DomainError("deviation curve needs a non-empty a-grid");
  if (samples.empty()) throw DomainError("deviation curve needs samples");
  for (std::size_t i = 0; i < a_grid.size(); ++i) {
    if (!(a_grid[i] >= 0.0)) throw DomainError("a-grid values must be >= 0");
    if (i > 0 && !(a_grid[i] > a_grid[i - 1])) throw DomainError("a-grid must be strictly ascending");
  }
  std::vector<double> magnitudes(samples.size());
  std::transform(samples.begin(), samples.end(), magnitudes.begin(), [](double v) { return std::fabs(v); });
  std::sort(magnitudes.begin(), magnitudes.end());

  DeviationCurve curve;
  curve.metadata = std::move(metadata);
  curve.metadata.mc = samples.size();
  const std::uint64_t mc = samples.size();
  for (double a : a_grid) {
    DeviationRow row;
    row.a = a;
    row.mc = mc;
    const auto first = std::lower_bound(magnitudes.begin(), magnitudes.end(), a);
    row.exceed_count = static_cast<std::uint64_t>(magnitudes.end() - first);
    row.p_hat = double(row.exceed_count) / double(mc);
    const Interval ci = clopper_pearson(row.exceed_count, mc);
    row.ci_low = std::min(ci.low, row.p_hat);
    row.ci_high = std::max(ci.high, row.p_hat);
    if (row.exceed_count > 0) row.g_n = std::log(row.p_hat);
    curve.rows.push_back(row);
  }
  return curve;
}

}  // namespace ergconc
