#include "ergconc/stats.hpp"

#include <boost/math/special_functions/beta.hpp>

#include "ergconc/errors.hpp"
#include "ergconc/numerics.hpp"

namespace ergconc {

Interval clopper_pearson(std::uint64_t k, std::uint64_t n, double level) {
  if (n == 0) throw DomainError("Clopper-Pearson needs at least one trial");
  if (k > n) throw DomainError("more successes than trials");
  if (!(level > 0.0 && level < 1.0)) throw DomainError("confidence level must lie in (0, 1)");
  const double tail = (1.0 - level) / 2.0;
  const double kd = static_cast<double>(k);
  const double nd = static_cast<double>(n);
  Interval ci{0.0, 1.0};
  if (k > 0) ci.low = boost::math::ibeta_inv(kd, nd - kd + 1.0, tail);
  if (k < n) ci.high = boost::math::ibeta_inv(kd + 1.0, nd - kd, 1.0 - tail);
  return ci;
}

double sample_variance(std::span<const double> samples) {
  if (samples.size() < 2) throw DomainError("sample variance needs at least two samples");
  CompensatedSum sum;
  for (double v : samples) sum.add(v);
  const double mean = sum.value() / double(samples.size());
  CompensatedSum sq;
  for (double v : samples) sq.add((v - mean) * (v - mean));
  return sq.value() / double(samples.size() - 1);
}

}  // namespace ergconc
