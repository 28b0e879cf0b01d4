#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ergconc/model.hpp"

namespace ergconc {

// Slack sequences of the sharp bound; the defaults are their limits.
struct BoundTuning {
  double q = 1.0;
  double q_hat = 1.0;
  double q_bar = 1.0;
  double e_n = 0.0;

  friend bool operator==(const BoundTuning&, const BoundTuning&) = default;
};

// Gamma_n together with the two coefficients of the deviation polynomial
//   A~_n = q nu(|sigma^* grad phi|^2) / 2 + e_n
//   B~_n = (q^3 q^ / 4) (q- ||sigma||_inf^2 [theta]_1^2 / 2 + e_n)
class BoundParams {
 public:
  static BoundParams from_proxies(double gamma_n, const VarianceProxies& proxies, const BoundTuning& tuning = {});
  static BoundParams from_coefficients(double gamma_n, double a_tilde, double b_tilde);

  // Same B~_n, with A~_n replaced by ||grad phi||_inf^2 nu(||sigma||^2) / 2.
  BoundParams sigma_variant(const VarianceProxies& proxies) const;

  double gamma_n() const noexcept { return gamma_n_; }
  double a_tilde() const noexcept { return a_tilde_; }
  double b_tilde() const noexcept { return b_tilde_; }
  // A_n(rho) = rho A~_n, B_n(rho) = rho^3 / (rho - 1) B~_n
  double a_n(double rho) const;
  double b_n(double rho) const;

 private:
  BoundParams(double gamma_n, double a_tilde, double b_tilde);
  double gamma_n_;
  double a_tilde_;
  double b_tilde_;
};

enum class Regime { kGaussian, kSuperGaussian, kGridOptimal };

struct RegimeChoice {
  double rho;
  Regime regime;
};

// Grid points closer than this to rho = 1 are excluded.
inline constexpr double kRhoCollar = 1e-9;
inline constexpr std::size_t kDefaultRhoGridSteps = 500'000;

// Cardan root Phi_n(a, rho) = cbrt(s + t) + cbrt(s - t),
// s = a / (sqrt(Gamma_n) B~), t = sqrt(s^2 + (rho - 1)(2 A~ / (3 B~))^3).
double phi_n(const BoundParams& params, double a, double rho);

// Minimizer of P: lambda_n = (Gamma_n / 2) ((rho - 1)^(1/3) / rho) Phi_n.
double lambda_n(const BoundParams& params, double a, double rho);

// P(lambda) = -a lambda / sqrt(Gamma_n) + lambda^2 A_n / Gamma_n + lambda^4 B_n / Gamma_n^3
double p_of_lambda(const BoundParams& params, double a, double rho, double lambda);
// P'(lambda)
double p_prime(const BoundParams& params, double a, double rho, double lambda);

// P(lambda_n) in closed form.
double p_min(const BoundParams& params, double a, double rho);

// rho - 1 = B~^(1/2) a / (2 A~^(3/2) sqrt(Gamma_n)), kept at least kRhoCollar above 1.
RegimeChoice rho_gaussian(const BoundParams& params, double a);
// rho = 3/2
RegimeChoice rho_super();

struct GridMinimum {
  double value;
  double rho;
};

// min over a uniform rho-mesh on (rho_lo, rho_hi] of p_min, refined by
// golden-section search around the best mesh point.
GridMinimum p_n_grid(const BoundParams& params, double a, std::size_t grid_steps = kDefaultRhoGridSteps,
                     double rho_lo = 1.0, double rho_hi = 2.0);

struct AsymptoticCurves {
  double s;        // -a^2 / (2 nu_carre)
  double s_sup;    // -a^2 / (2 sigma_sup^2 grad_phi_sup^2)
  double s_sigma;  // -a^2 / (2 grad_phi_sup^2 nu_sigma2)
};

AsymptoticCurves asymptotic_curves(const VarianceProxies& proxies, double a);

// min(1, 2 exp(p_min)) at the regime's rho (c_n = C_n = 1).
double probability_bound(const BoundParams& params, double a, Regime regime,
                         std::size_t grid_steps = kDefaultRhoGridSteps);

// a such that 2 exp(-a^2 / (2 nu)) = 1 - level.
double confidence_radius(double nu_carre, double level);

// h(xi) = xi^(1/3) (cbrt(1 + sqrt(1 + xi)) + cbrt(1 - sqrt(1 + xi))), in [0, 2/3).
double h_of(double xi);
// g(xi) = h(xi) (1 - h(xi) / 2), in [0, 4/9).
double g_of(double xi);
// f_Psi(xi) = g(xi) / (Psi xi + 1)
double f_psi(double xi, double psi);
// Psi = (27/8) B~ a^2 / (A~^3 Gamma_n)
double psi_of(const BoundParams& params, double a);
// 2^(1/2) / (3^(3/2) sqrt(Psi))
double xi_star_gaussian(double psi);
// 1 / (2 Psi)
double xi_star_super(double psi);

struct GPrimeExpansions {
  double small;  // 2^(1/3) / (3 xi^(2/3)), xi -> 0
  double large;  // 8 / (3^5 xi^2), xi -> infinity
};
GPrimeExpansions gprime_expansions(double xi);

// One row of the bound-curve table.
struct BoundCurveRow {
  double a;
  double s;
  double s_sup;
  double s_sigma;
  double p_rho0;
  double p_rhoinf;
  double p_n_0_inf;
  double p_n;
  double p_n_sigma;
  double rho_grid;  // argmin of the P_n search
};

std::vector<BoundCurveRow> bound_curves(const BoundParams& params, const VarianceProxies& proxies,
                                        std::span<const double> a_grid,
                                        std::size_t grid_steps = kDefaultRhoGridSteps, unsigned threads = 0);

}  // namespace ergconc
