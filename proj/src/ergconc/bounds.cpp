#include "ergconc/bounds.hpp"

#include <algorithm>
#include <cmath>

#include "ergconc/errors.hpp"
#include "ergconc/numerics.hpp"
#include "ergconc/parallel.hpp"

namespace ergconc {

namespace {

void check_rho(double rho) {
  if (!(rho > 1.0) || !std::isfinite(rho)) throw DomainError("rho must be a finite number > 1");
}

void check_a(double a) {
  if (!(a >= 0.0) || !std::isfinite(a)) throw DomainError("deviation level a must be finite and >= 0");
}

}  // namespace

BoundParams::BoundParams(double gamma_n, double a_tilde, double b_tilde)
    : gamma_n_(gamma_n), a_tilde_(a_tilde), b_tilde_(b_tilde) {
  if (!(gamma_n > 0.0) || !std::isfinite(gamma_n)) throw DomainError("Gamma_n must be positive");
  if (!(a_tilde > 0.0) || !std::isfinite(a_tilde)) throw DomainError("A~_n must be positive");
  if (!(b_tilde > 0.0) || !std::isfinite(b_tilde)) throw DomainError("B~_n must be positive");
}

BoundParams BoundParams::from_proxies(double gamma_n, const VarianceProxies& proxies, const BoundTuning& t) {
  if (!(t.q >= 1.0 && t.q_hat >= 1.0 && t.q_bar >= 1.0)) throw DomainError("q, q_hat, q_bar must be >= 1");
  if (!(t.e_n >= 0.0)) throw DomainError("e_n must be >= 0");
  const double a_tilde = t.q * proxies.nu_carre / 2.0 + t.e_n;
  const double lip = proxies.sigma_sup * proxies.theta_lip;
  const double b_tilde = t.q * t.q * t.q * t.q_hat / 4.0 * (t.q_bar * lip * lip / 2.0 + t.e_n);
  return BoundParams(gamma_n, a_tilde, b_tilde);
}

BoundParams BoundParams::from_coefficients(double gamma_n, double a_tilde, double b_tilde) {
  return BoundParams(gamma_n, a_tilde, b_tilde);
}

BoundParams BoundParams::sigma_variant(const VarianceProxies& proxies) const {
  const double g = proxies.grad_phi_sup;
  return BoundParams(gamma_n_, g * g * proxies.nu_sigma2 / 2.0, b_tilde_);
}

double BoundParams::a_n(double rho) const { return rho * a_tilde_; }

double BoundParams::b_n(double rho) const {
  check_rho(rho);
  return rho * rho * rho / (rho - 1.0) * b_tilde_;
}

double phi_n(const BoundParams& params, double a, double rho) {
  check_rho(rho);
  check_a(a);
  if (a == 0.0) return 0.0;
  const double s = a / (std::sqrt(params.gamma_n()) * params.b_tilde());
  const double ratio = 2.0 * params.a_tilde() / (3.0 * params.b_tilde());
  const double sqrt_k = std::sqrt(rho - 1.0) * ratio * std::sqrt(ratio);
  const double t = std::hypot(s, sqrt_k);
  // s - t < 0: cbrt(s + t) + cbrt(s - t) = cbrt(t + s) - cbrt(t - s),
  // with t - s = K / (t + s) to avoid cancellation.
  const double t_minus_s = sqrt_k * sqrt_k / (t + s);
  return cbrt_difference(t + s, t_minus_s, 2.0 * s);
}

double lambda_n(const BoundParams& params, double a, double rho) {
  const double phi = phi_n(params, a, rho);
  return params.gamma_n() / 2.0 * std::cbrt(rho - 1.0) / rho * phi;
}

double p_of_lambda(const BoundParams& params, double a, double rho, double lambda) {
  check_rho(rho);
  const double g = params.gamma_n();
  const double l2 = lambda * lambda;
  return -a * lambda / std::sqrt(g) + l2 * params.a_n(rho) / g + l2 * l2 * params.b_n(rho) / (g * g * g);
}

double p_prime(const BoundParams& params, double a, double rho, double lambda) {
  check_rho(rho);
  const double g = params.gamma_n();
  return -a / std::sqrt(g) + 2.0 * lambda * params.a_n(rho) / g +
         4.0 * lambda * lambda * lambda * params.b_n(rho) / (g * g * g);
}

double p_min(const BoundParams& params, double a, double rho) {
  const double phi = phi_n(params, a, rho);
  if (phi == 0.0) return 0.0;
  const double root_g = std::sqrt(params.gamma_n());
  const double c = std::cbrt(rho - 1.0);
  return -(root_g * c * phi) / (8.0 * rho) * (3.0 * a - root_g * c * params.a_tilde() * phi);
}

RegimeChoice rho_gaussian(const BoundParams& params, double a) {
  check_a(a);
  const double a_t = params.a_tilde();
  const double excess = 0.5 * std::sqrt(params.b_tilde()) * a / (a_t * std::sqrt(a_t) * std::sqrt(params.gamma_n()));
  return {1.0 + std::max(excess, kRhoCollar), Regime::kGaussian};
}

RegimeChoice rho_super() { return {1.5, Regime::kSuperGaussian}; }

GridMinimum p_n_grid(const BoundParams& params, double a, std::size_t grid_steps, double rho_lo, double rho_hi) {
  check_a(a);
  if (grid_steps < 2) throw DomainError("rho grid needs at least 2 steps");
  if (!(rho_lo >= 1.0 && rho_hi > rho_lo)) throw DomainError("rho grid range must satisfy 1 <= lo < hi");
  const double lo = std::max(rho_lo, 1.0 + kRhoCollar);
  const double width = rho_hi - rho_lo;
  auto rho_at = [&](std::size_t i) { return std::max(lo, rho_lo + width * double(i) / double(grid_steps)); };
  if (a == 0.0) return {0.0, rho_at(grid_steps)};

  GridMinimum best{INFINITY, lo};
  std::size_t best_i = 1;
  for (std::size_t i = 1; i <= grid_steps; ++i) {
    const double rho = rho_at(i);
    const double v = p_min(params, a, rho);
    if (v < best.value) {
      best = {v, rho};
      best_i = i;
    }
  }
  // Golden-section refinement on the two mesh cells around the best point.
  constexpr double kInvPhi = 0.6180339887498949;
  double left = rho_at(best_i > 1 ? best_i - 1 : 1);
  double right = rho_at(std::min(best_i + 1, grid_steps));
  double c = right - kInvPhi * (right - left);
  double e = left + kInvPhi * (right - left);
  double fc = p_min(params, a, c);
  double fe = p_min(params, a, e);
  for (int it = 0; it < 100 && right - left > 1e-15; ++it) {
    if (fc < fe) {
      right = e;
      e = c;
      fe = fc;
      c = right - kInvPhi * (right - left);
      fc = p_min(params, a, c);
    } else {
      left = c;
      c = e;
      fc = fe;
      e = left + kInvPhi * (right - left);
      fe = p_min(params, a, e);
    }
  }
  if (fc < best.value) best = {fc, c};
  if (fe < best.value) best = {fe, e};
  return best;
}

AsymptoticCurves asymptotic_curves(const VarianceProxies& proxies, double a) {
  const double sup = proxies.sigma_sup * proxies.sigma_sup * proxies.grad_phi_sup * proxies.grad_phi_sup;
  const double sig = proxies.grad_phi_sup * proxies.grad_phi_sup * proxies.nu_sigma2;
  if (!(proxies.nu_carre > 0.0) || !(sup > 0.0) || !(sig > 0.0)) {
    throw DomainError("asymptotic curves need positive nu_carre, sigma_sup grad_phi_sup and nu_sigma2");
  }
  const double a2 = a * a;
  return {-a2 / (2.0 * proxies.nu_carre), -a2 / (2.0 * sup), -a2 / (2.0 * sig)};
}

double probability_bound(const BoundParams& params, double a, Regime regime, std::size_t grid_steps) {
  check_a(a);
  double exponent = 0.0;
  switch (regime) {
    case Regime::kGaussian: exponent = p_min(params, a, rho_gaussian(params, a).rho); break;
    case Regime::kSuperGaussian: exponent = p_min(params, a, rho_super().rho); break;
    case Regime::kGridOptimal: exponent = p_n_grid(params, a, grid_steps).value; break;
  }
  return std::min(1.0, 2.0 * std::exp(exponent));
}

double confidence_radius(double nu_carre, double level) {
  if (!(level > 0.0 && level < 1.0)) throw DomainError("confidence level must lie in (0, 1)");
  if (!(nu_carre >= 0.0)) throw DomainError("nu_carre must be >= 0");
  return std::sqrt(2.0 * nu_carre * std::log(2.0 / (1.0 - level)));
}

double h_of(double xi) {
  if (!(xi >= 0.0)) throw DomainError("h is defined for xi >= 0");
  if (xi == 0.0) return 0.0;
  if (std::isinf(xi)) return 2.0 / 3.0;
  const double s = std::sqrt(1.0 + xi);
  // cbrt(1 + s) + cbrt(1 - s) = cbrt(1 + s) - cbrt(s - 1), s - 1 = xi / (1 + s)
  return std::cbrt(xi) * cbrt_difference(1.0 + s, xi / (1.0 + s), 2.0);
}

double g_of(double xi) {
  const double h = h_of(xi);
  return h * (1.0 - h / 2.0);
}

double f_psi(double xi, double psi) {
  if (!(psi >= 0.0)) throw DomainError("Psi must be >= 0");
  return g_of(xi) / (psi * xi + 1.0);
}

double psi_of(const BoundParams& params, double a) {
  check_a(a);
  const double a_t = params.a_tilde();
  return 27.0 / 8.0 * params.b_tilde() * a * a / (a_t * a_t * a_t * params.gamma_n());
}

double xi_star_gaussian(double psi) {
  if (!(psi > 0.0)) throw DomainError("Psi must be > 0");
  return std::sqrt(2.0) / (std::pow(3.0, 1.5) * std::sqrt(psi));
}

double xi_star_super(double psi) {
  if (!(psi > 0.0)) throw DomainError("Psi must be > 0");
  return 1.0 / (2.0 * psi);
}

GPrimeExpansions gprime_expansions(double xi) {
  if (!(xi > 0.0)) throw DomainError("expansions need xi > 0");
  return {std::cbrt(2.0) / (3.0 * std::cbrt(xi * xi)), 8.0 / (243.0 * xi * xi)};
}

std::vector<BoundCurveRow> bound_curves(const BoundParams& params, const VarianceProxies& proxies,
                                        std::span<const double> a_grid, std::size_t grid_steps,
                                        unsigned threads) {
  const BoundParams sigma_params = params.sigma_variant(proxies);
  std::vector<BoundCurveRow> rows(a_grid.size());
  parallel_for(a_grid.size(), threads, [&](std::size_t i) {
    const double a = a_grid[i];
    BoundCurveRow& row = rows[i];
    row.a = a;
    const AsymptoticCurves s = asymptotic_curves(proxies, a);
    row.s = s.s;
    row.s_sup = s.s_sup;
    row.s_sigma = s.s_sigma;
    const double rho0 = rho_gaussian(params, a).rho;
    const double rho_inf = rho_super().rho;
    row.p_rho0 = p_min(params, a, rho0);
    row.p_rhoinf = p_min(params, a, rho_inf);
    row.p_n_0_inf = std::min(row.p_rho0, row.p_rhoinf);
    // The search set is the mesh together with the two regime choices.
    GridMinimum grid = p_n_grid(params, a, grid_steps);
    if (row.p_rho0 < grid.value) grid = {row.p_rho0, rho0};
    if (row.p_rhoinf < grid.value) grid = {row.p_rhoinf, rho_inf};
    row.p_n = grid.value;
    row.rho_grid = grid.rho;
    const double sigma_rho0 = rho_gaussian(sigma_params, a).rho;
    row.p_n_sigma = std::min({p_n_grid(sigma_params, a, grid_steps).value, p_min(sigma_params, a, sigma_rho0),
                              p_min(sigma_params, a, rho_inf)});
  });
  return rows;
}

}  // namespace ergconc
