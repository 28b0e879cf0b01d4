#pragma once

#include <cstdint>
#include <span>

namespace ergconc {

struct Interval {
  double low;
  double high;
};

// Exact (Clopper-Pearson) two-sided interval for a binomial proportion.
Interval clopper_pearson(std::uint64_t successes, std::uint64_t trials, double level = 0.95);

// Unbiased sample variance; needs at least two samples.
double sample_variance(std::span<const double> samples);

}  // namespace ergconc
