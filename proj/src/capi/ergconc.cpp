#include "ergconc/ergconc.h"

#include <cmath>
#include <cstring>
#include <iostream>
#include <limits>
#include <new>
#include <optional>
#include <string>
#include <vector>

#include "ergconc/bounds.hpp"
#include "ergconc/commands.hpp"
#include "ergconc/config.hpp"
#include "ergconc/errors.hpp"
#include "ergconc/montecarlo.hpp"
#include "ergconc/stats.hpp"
#include "ergconc/steps.hpp"

struct ergconc_config {
  ergconc::ExperimentConfig value;
};

struct ergconc_bound_params {
  ergconc::BoundParams value;
};

struct ergconc_samples {
  std::vector<double> values;
  ergconc::ExperimentMetadata metadata;
};

namespace {

thread_local std::string last_error;

template <class F>
ergconc_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return ERGCONC_OK;
  } catch (const ergconc::Error& e) {
    last_error = e.what();
    return static_cast<ergconc_status>(e.status());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
  } catch (const std::exception& e) {
    last_error = e.what();
  } catch (...) {
    last_error = "unknown error";
  }
  return ERGCONC_ERR_INTERNAL;
}

template <class T>
void require(const T* p, const char* name) {
  if (p == nullptr) throw ergconc::DomainError(std::string(name) + " must not be null");
}

std::optional<unsigned> thread_override(int threads) {
  if (threads < 0) return std::nullopt;
  return static_cast<unsigned>(threads);
}

ergconc::VarianceProxies to_core(const ergconc_proxies& p) {
  ergconc::VarianceProxies v;
  v.nu_carre = p.nu_carre;
  v.nu_sigma2 = p.nu_sigma2;
  v.sigma_sup = p.sigma_sup;
  v.grad_phi_sup = p.grad_phi_sup;
  v.theta_lip = p.theta_lip;
  v.alpha = p.alpha;
  v.p_confluence = p.p_confluence;
  return v;
}

ergconc_proxies to_c(const ergconc::VarianceProxies& v) {
  return ergconc_proxies{v.nu_carre, v.nu_sigma2, v.sigma_sup, v.grad_phi_sup, v.theta_lip, v.alpha, v.p_confluence};
}

}  // namespace

extern "C" {

const char* ergconc_last_error(void) { return last_error.c_str(); }

const char* ergconc_version(void) { return "1.0.0"; }

ergconc_status ergconc_config_default(ergconc_config** out) {
  return guarded([&] {
    require(out, "out");
    *out = new ergconc_config{};
  });
}

ergconc_status ergconc_config_parse(const char* json_text, ergconc_config** out) {
  return guarded([&] {
    require(json_text, "json_text");
    require(out, "out");
    *out = nullptr;
    *out = new ergconc_config{ergconc::parse_config(json_text)};
  });
}

ergconc_status ergconc_config_load(const char* path, ergconc_config** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = nullptr;
    *out = new ergconc_config{ergconc::load_config(path)};
  });
}

void ergconc_config_free(ergconc_config* config) { delete config; }

ergconc_status ergconc_config_set_seed(ergconc_config* config, uint64_t seed) {
  return guarded([&] {
    require(config, "config");
    config->value.seed = seed;
  });
}

ergconc_status ergconc_config_set_threads(ergconc_config* config, unsigned threads) {
  return guarded([&] {
    require(config, "config");
    config->value.threads = threads;
  });
}

ergconc_status ergconc_config_validate(const ergconc_config* config) {
  return guarded([&] {
    require(config, "config");
    ergconc::validate_for_run(config->value);
  });
}

ergconc_status ergconc_config_serialize(const ergconc_config* config, char* buffer, size_t capacity,
                                        size_t* required) {
  return guarded([&] {
    require(config, "config");
    const std::string text = ergconc::serialize_config(config->value);
    if (required != nullptr) *required = text.size() + 1;
    if (buffer == nullptr) return;
    if (capacity < text.size() + 1) throw ergconc::DomainError("buffer too small for the serialized config");
    std::memcpy(buffer, text.c_str(), text.size() + 1);
  });
}

ergconc_status ergconc_config_resolve_proxies(const ergconc_config* config, int threads, ergconc_proxies* out) {
  return guarded([&] {
    require(config, "config");
    require(out, "out");
    const ergconc::ModelBundle bundle = ergconc::build_model(config->value);
    const unsigned t = thread_override(threads).value_or(config->value.threads);
    *out = to_c(ergconc::resolve_proxies(config->value, bundle, t).values);
  });
}

ergconc_status ergconc_run_command(const ergconc_config* config, ergconc_command command, const char* out_path,
                                   int threads) {
  return guarded([&] {
    require(config, "config");
    ergconc::CommandOptions options;
    if (out_path != nullptr) options.out = out_path;
    options.threads = thread_override(threads);
    options.console = &std::cout;
    const ergconc::ExperimentConfig& c = config->value;
    switch (command) {
      case ERGCONC_CMD_CHECK: ergconc::cmd_check(c, options); break;
      case ERGCONC_CMD_CARRE: ergconc::cmd_carre(c, options); break;
      case ERGCONC_CMD_DEVIATIONS: ergconc::cmd_deviations(c, options); break;
      case ERGCONC_CMD_BOUNDS: ergconc::cmd_bounds(c, options); break;
      case ERGCONC_CMD_FIGURE: ergconc::cmd_figure(c, options); break;
      case ERGCONC_CMD_SIMULATE: ergconc::cmd_simulate(c, options); break;
      default: throw ergconc::DomainError("unknown command");
    }
  });
}

ergconc_status ergconc_step(double gamma1, double theta, uint64_t k, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = ergconc::StepSchedule(gamma1, theta).step(k);
  });
}

ergconc_status ergconc_gamma_n(double gamma1, double theta, uint64_t n, double exponent, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = ergconc::partial_sums(ergconc::StepSchedule(gamma1, theta), n, {exponent}).sum(exponent);
  });
}

ergconc_status ergconc_bound_params_create(double gamma_n, double a_tilde, double b_tilde,
                                           ergconc_bound_params** out) {
  return guarded([&] {
    require(out, "out");
    *out = nullptr;
    *out = new ergconc_bound_params{ergconc::BoundParams::from_coefficients(gamma_n, a_tilde, b_tilde)};
  });
}

ergconc_status ergconc_bound_params_from_proxies(double gamma_n, const ergconc_proxies* proxies,
                                                 const ergconc_tuning* tuning, ergconc_bound_params** out) {
  return guarded([&] {
    require(proxies, "proxies");
    require(out, "out");
    *out = nullptr;
    ergconc::BoundTuning t;
    if (tuning != nullptr) t = ergconc::BoundTuning{tuning->q, tuning->q_hat, tuning->q_bar, tuning->e_n};
    *out = new ergconc_bound_params{ergconc::BoundParams::from_proxies(gamma_n, to_core(*proxies), t)};
  });
}

void ergconc_bound_params_free(ergconc_bound_params* params) { delete params; }

ergconc_status ergconc_phi_n(const ergconc_bound_params* params, double a, double rho, double* out) {
  return guarded([&] {
    require(params, "params");
    require(out, "out");
    *out = ergconc::phi_n(params->value, a, rho);
  });
}

ergconc_status ergconc_lambda_n(const ergconc_bound_params* params, double a, double rho, double* out) {
  return guarded([&] {
    require(params, "params");
    require(out, "out");
    *out = ergconc::lambda_n(params->value, a, rho);
  });
}

ergconc_status ergconc_p_of_lambda(const ergconc_bound_params* params, double a, double rho, double lambda,
                                   double* out) {
  return guarded([&] {
    require(params, "params");
    require(out, "out");
    *out = ergconc::p_of_lambda(params->value, a, rho, lambda);
  });
}

ergconc_status ergconc_p_min(const ergconc_bound_params* params, double a, double rho, double* out) {
  return guarded([&] {
    require(params, "params");
    require(out, "out");
    *out = ergconc::p_min(params->value, a, rho);
  });
}

ergconc_status ergconc_rho_gaussian(const ergconc_bound_params* params, double a, double* out) {
  return guarded([&] {
    require(params, "params");
    require(out, "out");
    *out = ergconc::rho_gaussian(params->value, a).rho;
  });
}

ergconc_status ergconc_p_n_grid(const ergconc_bound_params* params, double a, size_t steps, double* value,
                                double* rho) {
  return guarded([&] {
    require(params, "params");
    require(value, "value");
    const ergconc::GridMinimum m = ergconc::p_n_grid(params->value, a, steps);
    *value = m.value;
    if (rho != nullptr) *rho = m.rho;
  });
}

ergconc_status ergconc_probability_bound(const ergconc_bound_params* params, double a, ergconc_regime regime,
                                         size_t steps, double* out) {
  return guarded([&] {
    require(params, "params");
    require(out, "out");
    ergconc::Regime r;
    switch (regime) {
      case ERGCONC_REGIME_GAUSSIAN: r = ergconc::Regime::kGaussian; break;
      case ERGCONC_REGIME_SUPER_GAUSSIAN: r = ergconc::Regime::kSuperGaussian; break;
      case ERGCONC_REGIME_GRID_OPTIMAL: r = ergconc::Regime::kGridOptimal; break;
      default: throw ergconc::DomainError("unknown regime");
    }
    *out = ergconc::probability_bound(params->value, a, r, steps);
  });
}

ergconc_status ergconc_bound_curves(const ergconc_bound_params* params, const ergconc_proxies* proxies,
                                    const double* a_grid, size_t count, size_t steps, int threads,
                                    ergconc_bound_row* rows) {
  return guarded([&] {
    require(params, "params");
    require(proxies, "proxies");
    require(a_grid, "a_grid");
    require(rows, "rows");
    const auto result = ergconc::bound_curves(params->value, to_core(*proxies), std::span<const double>(a_grid, count),
                                              steps, thread_override(threads).value_or(0));
    for (size_t i = 0; i < count; ++i) {
      const auto& r = result[i];
      rows[i] = ergconc_bound_row{r.a, r.s, r.s_sup, r.s_sigma, r.p_rho0, r.p_rhoinf, r.p_n_0_inf, r.p_n,
                                  r.p_n_sigma, r.rho_grid};
    }
  });
}

ergconc_status ergconc_sample_deviations(const ergconc_config* config, int threads, ergconc_samples** out) {
  return guarded([&] {
    require(config, "config");
    require(out, "out");
    *out = nullptr;
    const ergconc::ExperimentConfig& c = config->value;
    ergconc::validate_for_run(c);
    const ergconc::ModelBundle bundle = ergconc::build_model(c);
    std::vector<double> values =
        ergconc::sample_deviations(*bundle.model, bundle.phi, c.schedule(), c.n, c.mc, ergconc::RngPolicy{c.seed},
                                   c.path_options(), thread_override(threads).value_or(c.threads));
    *out = new ergconc_samples{std::move(values), c.metadata()};
  });
}

void ergconc_samples_free(ergconc_samples* samples) { delete samples; }

size_t ergconc_samples_size(const ergconc_samples* samples) { return samples ? samples->values.size() : 0; }

const double* ergconc_samples_data(const ergconc_samples* samples) {
  return samples ? samples->values.data() : nullptr;
}

ergconc_status ergconc_deviation_curve(const ergconc_samples* samples, const double* a_grid, size_t count,
                                       ergconc_deviation_row* rows) {
  return guarded([&] {
    require(samples, "samples");
    require(a_grid, "a_grid");
    require(rows, "rows");
    const ergconc::DeviationCurve curve =
        ergconc::deviation_curve(samples->values, std::span<const double>(a_grid, count), samples->metadata);
    for (size_t i = 0; i < count; ++i) {
      const auto& r = curve.rows[i];
      rows[i] = ergconc_deviation_row{r.a,       r.exceed_count, r.mc,
                                      r.p_hat,   r.ci_low,       r.ci_high,
                                      r.g_n.value_or(std::numeric_limits<double>::quiet_NaN())};
    }
  });
}

ergconc_status ergconc_sample_variance(const double* values, size_t count, double* out) {
  return guarded([&] {
    require(values, "values");
    require(out, "out");
    *out = ergconc::sample_variance(std::span<const double>(values, count));
  });
}

}  // extern "C"
