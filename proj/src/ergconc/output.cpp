#include "ergconc/output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "ergconc/errors.hpp"
#include "ergconc/numerics.hpp"

namespace ergconc {

std::string metadata_line(const ExperimentMetadata& metadata) { return "# " + metadata.describe(); }

void write_deviation_csv(std::ostream& out, const DeviationCurve& curve) {
  out << metadata_line(curve.metadata) << '\n' << kDeviationHeader << '\n';
  for (const DeviationRow& row : curve.rows) {
    out << format_double(row.a) << ',' << format_double(row.p_hat) << ',' << format_double(row.ci_low) << ','
        << format_double(row.ci_high) << ',' << (row.g_n ? format_double(*row.g_n) : "nan") << '\n';
  }
}

namespace {

void bound_cells(std::ostream& out, const BoundCurveRow& r) {
  out << format_double(r.s) << ',' << format_double(r.s_sup) << ',' << format_double(r.s_sigma) << ','
      << format_double(r.p_rho0) << ',' << format_double(r.p_rhoinf) << ',' << format_double(r.p_n_0_inf) << ','
      << format_double(r.p_n) << ',' << format_double(r.p_n_sigma);
}

}  // namespace

void write_bound_csv(std::ostream& out, std::span<const BoundCurveRow> rows, const ExperimentMetadata& metadata) {
  out << metadata_line(metadata) << '\n' << kBoundHeader << '\n';
  for (const BoundCurveRow& r : rows) {
    out << format_double(r.a) << ',';
    bound_cells(out, r);
    out << '\n';
  }
}

void write_figure_csv(std::ostream& out, const DeviationCurve& curve, std::span<const BoundCurveRow> rows) {
  if (curve.rows.size() != rows.size()) throw DomainError("deviation and bound tables have different a-grids");
  out << metadata_line(curve.metadata) << '\n' << kFigureHeader << '\n';
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (curve.rows[i].a != rows[i].a) throw DomainError("deviation and bound tables have different a-grids");
    out << format_double(rows[i].a) << ',' << (curve.rows[i].g_n ? format_double(*curve.rows[i].g_n) : "nan") << ',';
    bound_cells(out, rows[i]);
    out << '\n';
  }
}

TraceWriter::TraceWriter(std::ostream& out, std::size_t dim, const ExperimentMetadata& metadata) : out_(out) {
  out_ << metadata_line(metadata) << '\n' << "k,gamma_k";
  for (std::size_t i = 1; i <= dim; ++i) out_ << ",x_" << i;
  out_ << '\n';
}

void TraceWriter::operator()(std::uint64_t k, double gamma_k, std::span<const double> x) {
  out_ << k << ',' << format_double(gamma_k);
  for (double xi : x) out_ << ',' << format_double(xi);
  out_ << '\n';
}

namespace {

constexpr double kWidth = 1000.0;
constexpr double kHeight = 700.0;
constexpr double kLeft = 90.0;
constexpr double kRight = 740.0;
constexpr double kTop = 60.0;
constexpr double kBottom = 620.0;

std::string fixed(double v, int digits = 2) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.*f", digits, v);
  std::string s = buffer;
  if (s == "-0.00" || s == "-0") s.erase(0, 1);
  return s;
}

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

double nice_step(double span, int target) {
  if (!(span > 0.0)) return 1.0;
  const double raw = span / target;
  const double magnitude = std::pow(10.0, std::floor(std::log10(raw)));
  const double r = raw / magnitude;
  const double nice = r <= 1.0 ? 1.0 : r <= 2.0 ? 2.0 : r <= 2.5 ? 2.5 : r <= 5.0 ? 5.0 : 10.0;
  return nice * magnitude;
}

std::string tick_label(double v, double step) {
  int digits = 0;
  double scaled = step;
  while (digits < 6 && std::fabs(scaled - std::round(scaled)) > 1e-9 * std::max(1.0, scaled)) {
    scaled *= 10.0;
    ++digits;
  }
  return fixed(v, digits);
}

struct Range {
  double lo;
  double hi;
};

Range padded(double lo, double hi) {
  if (!(hi > lo)) return {lo - 0.5, hi + 0.5};
  return {lo, hi};
}

}  // namespace

std::string render_line_chart(std::span<const double> x, std::span<const Series> series, const std::string& title,
                              const std::string& x_label, const std::string& y_label) {
  double x_lo = std::numeric_limits<double>::infinity();
  double x_hi = -x_lo;
  for (double v : x) {
    x_lo = std::min(x_lo, v);
    x_hi = std::max(x_hi, v);
  }
  if (x.empty()) x_lo = 0.0, x_hi = 1.0;
  double y_lo = std::numeric_limits<double>::infinity();
  double y_hi = -y_lo;
  for (const Series& s : series) {
    for (double v : s.y) {
      if (!std::isfinite(v)) continue;
      y_lo = std::min(y_lo, v);
      y_hi = std::max(y_hi, v);
    }
  }
  if (!std::isfinite(y_lo)) y_lo = -1.0, y_hi = 0.0;

  const Range xr = padded(x_lo, x_hi);
  Range yr = padded(y_lo, y_hi);
  const double y_step = nice_step(yr.hi - yr.lo, 8);
  yr.lo = std::floor(yr.lo / y_step) * y_step;
  yr.hi = std::ceil(yr.hi / y_step) * y_step;
  const double x_step = nice_step(xr.hi - xr.lo, 10);

  auto px = [&](double v) { return kLeft + (v - xr.lo) / (xr.hi - xr.lo) * (kRight - kLeft); };
  auto py = [&](double v) { return kBottom - (v - yr.lo) / (yr.hi - yr.lo) * (kBottom - kTop); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << fixed(kWidth, 0) << ' ' << fixed(kHeight, 0)
      << "\" width=\"" << fixed(kWidth, 0) << "\" height=\"" << fixed(kHeight, 0)
      << "\" font-family=\"sans-serif\" font-size=\"13\">\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"" << fixed(kWidth, 0) << "\" height=\"" << fixed(kHeight, 0)
      << "\" fill=\"white\"/>\n";
  svg << "<text x=\"" << fixed((kLeft + kRight) / 2) << "\" y=\"30\" text-anchor=\"middle\" font-size=\"16\">"
      << escape(title) << "</text>\n";

  svg << "<g stroke=\"#dddddd\" stroke-width=\"1\">\n";
  const long y_ticks = std::lround((yr.hi - yr.lo) / y_step);
  for (long i = 0; i <= y_ticks; ++i) {
    const double v = yr.lo + double(i) * y_step;
    svg << "<line x1=\"" << fixed(kLeft) << "\" y1=\"" << fixed(py(v)) << "\" x2=\"" << fixed(kRight) << "\" y2=\""
        << fixed(py(v)) << "\"/>\n";
  }
  const long x_first = static_cast<long>(std::ceil(xr.lo / x_step - 1e-9));
  const long x_last = static_cast<long>(std::floor(xr.hi / x_step + 1e-9));
  for (long i = x_first; i <= x_last; ++i) {
    const double v = double(i) * x_step;
    svg << "<line x1=\"" << fixed(px(v)) << "\" y1=\"" << fixed(kTop) << "\" x2=\"" << fixed(px(v)) << "\" y2=\""
        << fixed(kBottom) << "\"/>\n";
  }
  svg << "</g>\n";

  svg << "<rect x=\"" << fixed(kLeft) << "\" y=\"" << fixed(kTop) << "\" width=\"" << fixed(kRight - kLeft)
      << "\" height=\"" << fixed(kBottom - kTop) << "\" fill=\"none\" stroke=\"black\"/>\n";
  svg << "<g text-anchor=\"end\">\n";
  for (long i = 0; i <= y_ticks; ++i) {
    const double v = yr.lo + double(i) * y_step;
    svg << "<text x=\"" << fixed(kLeft - 8) << "\" y=\"" << fixed(py(v) + 4) << "\">" << tick_label(v, y_step)
        << "</text>\n";
  }
  svg << "</g>\n<g text-anchor=\"middle\">\n";
  for (long i = x_first; i <= x_last; ++i) {
    const double v = double(i) * x_step;
    svg << "<text x=\"" << fixed(px(v)) << "\" y=\"" << fixed(kBottom + 20) << "\">" << tick_label(v, x_step)
        << "</text>\n";
  }
  svg << "</g>\n";
  svg << "<text x=\"" << fixed((kLeft + kRight) / 2) << "\" y=\"" << fixed(kBottom + 50)
      << "\" text-anchor=\"middle\">" << escape(x_label) << "</text>\n";
  svg << "<text x=\"25\" y=\"" << fixed((kTop + kBottom) / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 25 "
      << fixed((kTop + kBottom) / 2) << ")\">" << escape(y_label) << "</text>\n";

  for (const Series& s : series) {
    svg << "<g fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"2\"";
    if (s.dashed) svg << " stroke-dasharray=\"6 4\"";
    svg << ">\n";
    std::string points;
    auto flush = [&] {
      if (!points.empty()) svg << "<polyline points=\"" << points << "\"/>\n";
      points.clear();
    };
    for (std::size_t i = 0; i < x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.y[i])) {
        flush();
        continue;
      }
      if (!points.empty()) points += ' ';
      points += fixed(px(x[i])) + "," + fixed(py(s.y[i]));
    }
    flush();
    svg << "</g>\n";
  }

  double ly = kTop + 10.0;
  for (const Series& s : series) {
    svg << "<line x1=\"760\" y1=\"" << fixed(ly) << "\" x2=\"800\" y2=\"" << fixed(ly) << "\" stroke=\"" << s.color
        << "\" stroke-width=\"2\"";
    if (s.dashed) svg << " stroke-dasharray=\"6 4\"";
    svg << "/>\n<text x=\"810\" y=\"" << fixed(ly + 4) << "\">" << escape(s.label) << "</text>\n";
    ly += 24.0;
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string render_figure_svg(const DeviationCurve& curve, std::span<const BoundCurveRow> rows) {
  std::vector<double> x;
  for (const BoundCurveRow& r : rows) x.push_back(r.a);
  auto column = [&](double BoundCurveRow::*member) {
    std::vector<double> y;
    for (const BoundCurveRow& r : rows) y.push_back(r.*member);
    return y;
  };
  std::vector<double> g;
  for (const DeviationRow& r : curve.rows) g.push_back(r.g_n ? *r.g_n : std::numeric_limits<double>::quiet_NaN());

  const std::vector<Series> series{
      {"g_n (Monte Carlo)", "#000000", g, false},
      {"P_n", "#d62728", column(&BoundCurveRow::p_n), false},
      {"P_n,0,inf", "#ff7f0e", column(&BoundCurveRow::p_n_0_inf), true},
      {"P(rho_0)", "#bcbd22", column(&BoundCurveRow::p_rho0), true},
      {"P(rho_inf)", "#8c564b", column(&BoundCurveRow::p_rhoinf), true},
      {"P_n,sigma", "#9467bd", column(&BoundCurveRow::p_n_sigma), false},
      {"S", "#1f77b4", column(&BoundCurveRow::s), false},
      {"S_sup", "#17becf", column(&BoundCurveRow::s_sup), true},
      {"S_sigma", "#2ca02c", column(&BoundCurveRow::s_sigma), true},
  };
  return render_line_chart(x, series, "Deviation log-probability and concentration bounds (" +
                                          curve.metadata.describe() + ")",
                           "a", "log-probability");
}

void write_output(const std::string& path, std::ostream* fallback, const std::function<void(std::ostream&)>& emit) {
  if (path.empty()) {
    if (fallback == nullptr) return;
    emit(*fallback);
    fallback->flush();
    if (!*fallback) throw IoError("failed writing to standard output");
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  emit(out);
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace ergconc
