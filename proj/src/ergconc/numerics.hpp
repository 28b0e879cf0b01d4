#pragma once

#include <charconv>
#include <cmath>
#include <string>

namespace ergconc {

// Neumaier's variant of Kahan summation.
class CompensatedSum {
 public:
  void add(double value) noexcept {
    const double t = sum_ + value;
    if (std::fabs(sum_) >= std::fabs(value)) {
      compensation_ += (sum_ - t) + value;
    } else {
      compensation_ += (value - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + compensation_; }

  friend bool operator==(const CompensatedSum&, const CompensatedSum&) = default;

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

// cbrt(p) - cbrt(m) for p >= m >= 0, with the difference p - m supplied
// separately so that near-equal roots do not cancel.
inline double cbrt_difference(double p, double m, double p_minus_m) noexcept {
  const double u = std::cbrt(p);
  const double v = std::cbrt(m);
  const double denom = u * u + u * v + v * v;
  return denom > 0.0 ? p_minus_m / denom : 0.0;
}

// Shortest decimal text that parses back to the same double; "nan", "inf", "-inf"
// for non-finite values. Negative zero prints as "0".
inline std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0.0) return "0";
  char buffer[32];
  const auto result = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, result.ptr);
}

}  // namespace ergconc
