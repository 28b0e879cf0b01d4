#ifndef ERGCONC_ERGCONC_H
#define ERGCONC_ERGCONC_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define ERGCONC_API __declspec(dllexport)
#else
#define ERGCONC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes; the CLI uses them as exit codes. */
typedef enum ergconc_status {
  ERGCONC_OK = 0,
  ERGCONC_ERR_CONFIG = 1,
  ERGCONC_ERR_DIVERGENCE = 2,
  ERGCONC_ERR_IO = 3,
  ERGCONC_ERR_DOMAIN = 4,
  ERGCONC_ERR_INTERNAL = 5
} ergconc_status;

typedef enum ergconc_command {
  ERGCONC_CMD_CHECK = 0,
  ERGCONC_CMD_CARRE = 1,
  ERGCONC_CMD_DEVIATIONS = 2,
  ERGCONC_CMD_BOUNDS = 3,
  ERGCONC_CMD_FIGURE = 4,
  ERGCONC_CMD_SIMULATE = 5
} ergconc_command;

typedef enum ergconc_regime {
  ERGCONC_REGIME_GAUSSIAN = 0,
  ERGCONC_REGIME_SUPER_GAUSSIAN = 1,
  ERGCONC_REGIME_GRID_OPTIMAL = 2
} ergconc_regime;

typedef struct ergconc_config ergconc_config;
typedef struct ergconc_bound_params ergconc_bound_params;
typedef struct ergconc_samples ergconc_samples;

typedef struct ergconc_proxies {
  double nu_carre;
  double nu_sigma2;
  double sigma_sup;
  double grad_phi_sup;
  double theta_lip;
  double alpha;
  double p_confluence;
} ergconc_proxies;

typedef struct ergconc_tuning {
  double q;
  double q_hat;
  double q_bar;
  double e_n;
} ergconc_tuning;

typedef struct ergconc_deviation_row {
  double a;
  uint64_t exceed_count;
  uint64_t mc;
  double p_hat;
  double ci_low;
  double ci_high;
  double g_n; /* NaN when no replicate reaches a */
} ergconc_deviation_row;

typedef struct ergconc_bound_row {
  double a;
  double s;
  double s_sup;
  double s_sigma;
  double p_rho0;
  double p_rhoinf;
  double p_n_0_inf;
  double p_n;
  double p_n_sigma;
  double rho_grid;
} ergconc_bound_row;

/* Message of the last failure on the calling thread; empty after success. */
ERGCONC_API const char* ergconc_last_error(void);
ERGCONC_API const char* ergconc_version(void);

/* Configuration */
ERGCONC_API ergconc_status ergconc_config_default(ergconc_config** out);
ERGCONC_API ergconc_status ergconc_config_parse(const char* json_text, ergconc_config** out);
ERGCONC_API ergconc_status ergconc_config_load(const char* path, ergconc_config** out);
ERGCONC_API void ergconc_config_free(ergconc_config* config);
ERGCONC_API ergconc_status ergconc_config_set_seed(ergconc_config* config, uint64_t seed);
ERGCONC_API ergconc_status ergconc_config_set_threads(ergconc_config* config, unsigned threads);
/* Checks theta admissibility and counts before a run. */
ERGCONC_API ergconc_status ergconc_config_validate(const ergconc_config* config);
/* Writes the JSON document (NUL-terminated) when it fits; *required gets the
   needed capacity including the terminator. */
ERGCONC_API ergconc_status ergconc_config_serialize(const ergconc_config* config, char* buffer, size_t capacity,
                                                    size_t* required);
ERGCONC_API ergconc_status ergconc_config_resolve_proxies(const ergconc_config* config, int threads,
                                                          ergconc_proxies* out);

/* Runs a subcommand. out_path may be NULL (configured path or stdout);
   threads < 0 keeps the configured count, 0 means auto. */
ERGCONC_API ergconc_status ergconc_run_command(const ergconc_config* config, ergconc_command command,
                                               const char* out_path, int threads);

/* Steps */
ERGCONC_API ergconc_status ergconc_step(double gamma1, double theta, uint64_t k, double* out);
ERGCONC_API ergconc_status ergconc_gamma_n(double gamma1, double theta, uint64_t n, double exponent, double* out);

/* Bounds */
ERGCONC_API ergconc_status ergconc_bound_params_create(double gamma_n, double a_tilde, double b_tilde,
                                                       ergconc_bound_params** out);
ERGCONC_API ergconc_status ergconc_bound_params_from_proxies(double gamma_n, const ergconc_proxies* proxies,
                                                             const ergconc_tuning* tuning,
                                                             ergconc_bound_params** out);
ERGCONC_API void ergconc_bound_params_free(ergconc_bound_params* params);
ERGCONC_API ergconc_status ergconc_phi_n(const ergconc_bound_params* params, double a, double rho, double* out);
ERGCONC_API ergconc_status ergconc_lambda_n(const ergconc_bound_params* params, double a, double rho, double* out);
ERGCONC_API ergconc_status ergconc_p_of_lambda(const ergconc_bound_params* params, double a, double rho,
                                               double lambda, double* out);
ERGCONC_API ergconc_status ergconc_p_min(const ergconc_bound_params* params, double a, double rho, double* out);
ERGCONC_API ergconc_status ergconc_rho_gaussian(const ergconc_bound_params* params, double a, double* out);
ERGCONC_API ergconc_status ergconc_p_n_grid(const ergconc_bound_params* params, double a, size_t steps,
                                            double* value, double* rho);
ERGCONC_API ergconc_status ergconc_probability_bound(const ergconc_bound_params* params, double a,
                                                     ergconc_regime regime, size_t steps, double* out);
ERGCONC_API ergconc_status ergconc_bound_curves(const ergconc_bound_params* params, const ergconc_proxies* proxies,
                                                const double* a_grid, size_t count, size_t steps, int threads,
                                                ergconc_bound_row* rows);

/* Monte Carlo */
ERGCONC_API ergconc_status ergconc_sample_deviations(const ergconc_config* config, int threads,
                                                     ergconc_samples** out);
ERGCONC_API void ergconc_samples_free(ergconc_samples* samples);
ERGCONC_API size_t ergconc_samples_size(const ergconc_samples* samples);
ERGCONC_API const double* ergconc_samples_data(const ergconc_samples* samples);
ERGCONC_API ergconc_status ergconc_deviation_curve(const ergconc_samples* samples, const double* a_grid, size_t count,
                                                   ergconc_deviation_row* rows);
ERGCONC_API ergconc_status ergconc_sample_variance(const double* values, size_t count, double* out);

#ifdef __cplusplus
}
#endif

#endif
