#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "ergconc/errors.hpp"
#include "ergconc/output.hpp"

using namespace ergconc;

namespace {

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

DeviationCurve sample_curve() {
  const std::vector<double> samples{-2.0, -0.5, 0.1, 0.5, 1.0, 3.0};
  const std::vector<double> grid{0.0, 1.0, 4.0};
  return deviation_curve(samples, grid, ExperimentMetadata{100, 0.5, 1.0, 6, 9, "cosine-ou"});
}

std::vector<BoundCurveRow> sample_bounds() {
  return {{0.0, 0, 0, 0, 0, 0, 0, 0, 0, 2.0},
          {1.0, -3.3, -0.5, -1.2, -1.1, -1.3, -1.3, -1.4, -0.7, 1.4},
          {4.0, -50, -8, -19, -4, -6, -6, -6.1, -3, 1.9}};
}

}  // namespace

TEST_SUITE("output") {
  TEST_CASE("deviation CSV") {
    std::ostringstream out;
    write_deviation_csv(out, sample_curve());
    const auto l = lines(out.str());
    REQUIRE(l.size() == 5);
    CHECK(l[0] == "# n=100,theta=0.5,gamma1=1,mc=6,seed=9,model=cosine-ou");
    CHECK(l[1] == "a,p_hat,ci_low,ci_high,g_n");
    CHECK(l[2].rfind("0,1,", 0) == 0);
    CHECK(l[2].substr(l[2].size() - 2) == ",0");
    CHECK(l[4].rfind("4,0,0,", 0) == 0);
    CHECK(l[4].substr(l[4].size() - 4) == ",nan");
  }

  TEST_CASE("bound CSV") {
    std::ostringstream out;
    write_bound_csv(out, sample_bounds(), ExperimentMetadata{100, 0.5, 1.0, 6, 9, "cosine-ou"});
    const auto l = lines(out.str());
    REQUIRE(l.size() == 5);
    CHECK(l[0][0] == '#');
    CHECK(l[1] == "a,S,S_sup,S_sigma,P_rho0,P_rhoinf,P_n_0_inf,P_n,P_n_sigma");
    CHECK(l[2] == "0,0,0,0,0,0,0,0,0");
    CHECK(l[3] == "1,-3.3,-0.5,-1.2,-1.1,-1.3,-1.3,-1.4,-0.7");
  }

  TEST_CASE("figure CSV joins on a") {
    std::ostringstream out;
    write_figure_csv(out, sample_curve(), sample_bounds());
    const auto l = lines(out.str());
    REQUIRE(l.size() == 5);
    CHECK(l[1] == "a,g_n,S,S_sup,S_sigma,P_rho0,P_rhoinf,P_n_0_inf,P_n,P_n_sigma");
    CHECK(l[4].rfind("4,nan,-50,", 0) == 0);
    auto bounds = sample_bounds();
    bounds[1].a = 1.5;
    std::ostringstream bad;
    CHECK_THROWS_AS(write_figure_csv(bad, sample_curve(), bounds), DomainError);
  }

  TEST_CASE("trace writer") {
    std::ostringstream out;
    {
      TraceWriter w(out, 2, ExperimentMetadata{});
      const double x[] = {0.5, -1.0};
      w(0, 0.0, x);
      w(1, 0.25, x);
    }
    const auto l = lines(out.str());
    REQUIRE(l.size() == 4);
    CHECK(l[1] == "k,gamma_k,x_1,x_2");
    CHECK(l[2] == "0,0,0.5,-1");
    CHECK(l[3] == "1,0.25,0.5,-1");
  }

  TEST_CASE("SVG structure") {
    const std::string svg = render_figure_svg(sample_curve(), sample_bounds());
    CHECK(svg.rfind("<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 1000 700\"", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    // nine series in the legend and nine curve groups
    CHECK(count(svg, "<text x=\"810\"") == 9);
    CHECK(count(svg, "<g fill=\"none\"") == 9);
    // g_n is undefined at a = 4, so its polyline covers two points only
    const auto g = svg.find("<g fill=\"none\" stroke=\"#000000\"");
    const auto g_end = svg.find("</g>", g);
    const std::string group = svg.substr(g, g_end - g);
    CHECK(count(group, "<polyline") == 1);
    CHECK(count(group, ",") == 2);
    CHECK(svg.find(">a</text>") != std::string::npos);
    CHECK(svg.find("log-probability") != std::string::npos);
    CHECK(svg == render_figure_svg(sample_curve(), sample_bounds()));
  }

  TEST_CASE("a hole in a series breaks its polyline") {
    const std::vector<double> x{0, 1, 2, 3, 4};
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const std::vector<Series> series{{"y", "#123456", {0, -1, nan, -3, -4}, false}};
    const std::string svg = render_line_chart(x, series, "t", "x", "y");
    CHECK(count(svg, "<polyline") == 2);
  }

  TEST_CASE("bound curves only when no data") {
    DeviationCurve empty = sample_curve();
    for (auto& r : empty.rows) r.g_n.reset();
    const std::string svg = render_figure_svg(empty, sample_bounds());
    const auto g = svg.find("<g fill=\"none\" stroke=\"#000000\"");
    const std::string group = svg.substr(g, svg.find("</g>", g) - g);
    CHECK(count(group, "<polyline") == 0);
    CHECK(count(svg, "<polyline") == 8);
  }

  TEST_CASE("write_output") {
    std::ostringstream console;
    write_output("", &console, [](std::ostream& o) { o << "hello"; });
    CHECK(console.str() == "hello");
    CHECK_THROWS_AS(write_output("/nonexistent/dir/file.csv", nullptr, [](std::ostream& o) { o << "x"; }), IoError);
  }
}
