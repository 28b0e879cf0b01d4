#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ergconc/bounds.hpp"
#include "ergconc/montecarlo.hpp"

namespace ergconc {

inline constexpr const char* kDeviationHeader = "a,p_hat,ci_low,ci_high,g_n";
inline constexpr const char* kBoundHeader = "a,S,S_sup,S_sigma,P_rho0,P_rhoinf,P_n_0_inf,P_n,P_n_sigma";
inline constexpr const char* kFigureHeader = "a,g_n,S,S_sup,S_sigma,P_rho0,P_rhoinf,P_n_0_inf,P_n,P_n_sigma";

// "# n=..,theta=..,gamma1=..,mc=..,seed=..,model=.."
std::string metadata_line(const ExperimentMetadata& metadata);

void write_deviation_csv(std::ostream& out, const DeviationCurve& curve);
void write_bound_csv(std::ostream& out, std::span<const BoundCurveRow> rows, const ExperimentMetadata& metadata);
// Deviation and bound rows joined on a; both tables must share the a-grid.
void write_figure_csv(std::ostream& out, const DeviationCurve& curve, std::span<const BoundCurveRow> rows);

// Streams `k,gamma_k,x_1..x_d` rows.
class TraceWriter {
 public:
  TraceWriter(std::ostream& out, std::size_t dim, const ExperimentMetadata& metadata);
  void operator()(std::uint64_t k, double gamma_k, std::span<const double> x);

 private:
  std::ostream& out_;
};

struct Series {
  std::string label;
  std::string color;
  std::vector<double> y;  // NaN breaks the line
  bool dashed = false;
};

// Line chart with a fixed 1000x700 viewBox, linear axes, one polyline per
// contiguous run of each series, and a legend.
std::string render_line_chart(std::span<const double> x, std::span<const Series> series, const std::string& title,
                              const std::string& x_label, const std::string& y_label);

// The deviation/bound overlay.
std::string render_figure_svg(const DeviationCurve& curve, std::span<const BoundCurveRow> rows);

// Runs `emit` on a stream for `path`, or on `fallback` when the path is empty.
// Throws IoError when the file cannot be opened or written.
void write_output(const std::string& path, std::ostream* fallback, const std::function<void(std::ostream&)>& emit);

}  // namespace ergconc
