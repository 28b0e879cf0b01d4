#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "ergconc/ergconc.h"

static int failures = 0;

#define EXPECT(cond)                                                   \
  do {                                                                 \
    if (!(cond)) {                                                     \
      fprintf(stderr, "%s:%d: expected %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                      \
    }                                                                  \
  } while (0)

static int close_to(double x, double ref, double rel) { return fabs(x - ref) <= rel * fabs(ref); }

static const char* kSmall =
    "{\"n\": 200, \"mc\": 20, \"seed\": 5, \"threads\": 1,"
    " \"a_grid\": {\"min\": 0, \"max\": 1, \"count\": 3},"
    " \"rho_grid_steps\": 1000,"
    " \"proxies\": {\"nu_carre\": 0.15, \"nu_sigma2\": 0.55}}";

static void test_steps(void) {
  const double theta = 1.0 / 3.0 + 1e-3;
  double v = 0.0;
  EXPECT(ergconc_step(1.0, theta, 50000, &v) == ERGCONC_OK);
  EXPECT(close_to(v, 0.026852065335053555, 1e-13));
  EXPECT(ergconc_gamma_n(1.0, theta, 50000, 1.0, &v) == ERGCONC_OK);
  EXPECT(close_to(v, 2015.9681866564226, 1e-12));
  EXPECT(ergconc_gamma_n(1.0, theta, 50000, 2.0, &v) == ERGCONC_OK);
  EXPECT(close_to(v, 106.34268201233989, 1e-12));
  EXPECT(ergconc_step(1.0, theta, 0, &v) == ERGCONC_ERR_DOMAIN);
  EXPECT(strlen(ergconc_last_error()) > 0);
  EXPECT(ergconc_step(1.0, theta, 1, NULL) == ERGCONC_ERR_DOMAIN);
}

static void test_config(void) {
  ergconc_config* config = NULL;
  EXPECT(ergconc_config_parse("{\"theta\": \"x\"}", &config) == ERGCONC_ERR_CONFIG);
  EXPECT(config == NULL);
  EXPECT(strstr(ergconc_last_error(), "theta") != NULL);
  EXPECT(ergconc_config_load("/nonexistent/config.json", &config) == ERGCONC_ERR_IO);

  EXPECT(ergconc_config_parse(kSmall, &config) == ERGCONC_OK);
  EXPECT(strlen(ergconc_last_error()) == 0);
  size_t required = 0;
  EXPECT(ergconc_config_serialize(config, NULL, 0, &required) == ERGCONC_OK);
  EXPECT(required > 1);
  char tiny[4];
  EXPECT(ergconc_config_serialize(config, tiny, sizeof tiny, &required) == ERGCONC_ERR_DOMAIN);
  char* text = malloc(required);
  EXPECT(ergconc_config_serialize(config, text, required, NULL) == ERGCONC_OK);
  ergconc_config* again = NULL;
  EXPECT(ergconc_config_parse(text, &again) == ERGCONC_OK);
  char* text2 = malloc(required);
  EXPECT(ergconc_config_serialize(again, text2, required, NULL) == ERGCONC_OK);
  EXPECT(strcmp(text, text2) == 0);
  free(text);
  free(text2);
  ergconc_config_free(again);

  EXPECT(ergconc_config_validate(config) == ERGCONC_OK);
  ergconc_proxies proxies;
  EXPECT(ergconc_config_resolve_proxies(config, -1, &proxies) == ERGCONC_OK);
  EXPECT(proxies.nu_carre == 0.15);
  EXPECT(close_to(proxies.alpha, 0.25, 1e-9));
  EXPECT(close_to(proxies.theta_lip, 2.0, 1e-9));
  ergconc_config_free(config);

  EXPECT(ergconc_config_parse("{\"theta\": 0.2}", &config) == ERGCONC_OK);
  EXPECT(ergconc_config_validate(config) == ERGCONC_ERR_CONFIG);
  ergconc_config_free(config);
  ergconc_config_free(NULL);
}

static void test_bounds(void) {
  ergconc_bound_params* p = NULL;
  EXPECT(ergconc_bound_params_create(2036.0, 0.07575, 0.5, &p) == ERGCONC_OK);
  double rho = 0.0;
  EXPECT(ergconc_rho_gaussian(p, 1.0, &rho) == ERGCONC_OK);
  EXPECT(close_to(rho, 1.3758306230162408, 1e-12));

  double lambda = 0.0, best = 0.0, value = 0.0;
  EXPECT(ergconc_lambda_n(p, 1.0, 1.5, &lambda) == ERGCONC_OK);
  EXPECT(ergconc_p_min(p, 1.0, 1.5, &best) == ERGCONC_OK);
  EXPECT(ergconc_p_of_lambda(p, 1.0, 1.5, lambda, &value) == ERGCONC_OK);
  EXPECT(close_to(value, best, 1e-12));
  for (int i = 1; i <= 50; ++i) {
    EXPECT(ergconc_p_of_lambda(p, 1.0, 1.5, lambda * i / 25.0, &value) == ERGCONC_OK);
    EXPECT(value >= best - 1e-12 * fabs(best));
  }

  double grid = 0.0, arg = 0.0;
  EXPECT(ergconc_p_n_grid(p, 1.0, 2000, &grid, &arg) == ERGCONC_OK);
  EXPECT(arg > 1.0 && arg <= 2.0);
  double gaussian = 0.0;
  EXPECT(ergconc_probability_bound(p, 1.0, ERGCONC_REGIME_GAUSSIAN, 0, &gaussian) == ERGCONC_OK);
  EXPECT(grid <= gaussian + 1e-6);

  EXPECT(ergconc_phi_n(p, 1.0, 1.0, &value) == ERGCONC_ERR_DOMAIN);
  EXPECT(ergconc_phi_n(p, -1.0, 1.5, &value) == ERGCONC_ERR_DOMAIN);
  ergconc_bound_params_free(p);
  EXPECT(ergconc_bound_params_create(2036.0, -1.0, 0.5, &p) == ERGCONC_ERR_DOMAIN);
  EXPECT(p == NULL);
}

static void test_montecarlo(void) {
  ergconc_config* config = NULL;
  EXPECT(ergconc_config_parse(kSmall, &config) == ERGCONC_OK);
  ergconc_samples* one = NULL;
  ergconc_samples* many = NULL;
  EXPECT(ergconc_sample_deviations(config, 1, &one) == ERGCONC_OK);
  EXPECT(ergconc_sample_deviations(config, 4, &many) == ERGCONC_OK);
  EXPECT(ergconc_samples_size(one) == 20);
  EXPECT(memcmp(ergconc_samples_data(one), ergconc_samples_data(many), 20 * sizeof(double)) == 0);

  const double grid[3] = {0.0, 0.5, 1e6};
  ergconc_deviation_row rows[3];
  EXPECT(ergconc_deviation_curve(one, grid, 3, rows) == ERGCONC_OK);
  EXPECT(rows[0].p_hat == 1.0 && rows[0].g_n == 0.0);
  EXPECT(rows[1].ci_low <= rows[1].p_hat && rows[1].p_hat <= rows[1].ci_high);
  EXPECT(rows[2].exceed_count == 0 && isnan(rows[2].g_n));
  const double bad[2] = {1.0, 0.5};
  EXPECT(ergconc_deviation_curve(one, bad, 2, rows) == ERGCONC_ERR_DOMAIN);

  double var = 0.0;
  const double values[4] = {1.0, 2.0, 3.0, 4.0};
  EXPECT(ergconc_sample_variance(values, 4, &var) == ERGCONC_OK);
  EXPECT(close_to(var, 5.0 / 3.0, 1e-15));
  EXPECT(ergconc_sample_variance(values, 1, &var) == ERGCONC_ERR_DOMAIN);

  ergconc_samples_free(one);
  ergconc_samples_free(many);
  ergconc_config_free(config);
}

static void test_commands(void) {
  ergconc_config* config = NULL;
  EXPECT(ergconc_config_parse(kSmall, &config) == ERGCONC_OK);
  EXPECT(ergconc_run_command(config, ERGCONC_CMD_DEVIATIONS, "capi_deviations.csv", 2) == ERGCONC_OK);
  FILE* f = fopen("capi_deviations.csv", "r");
  EXPECT(f != NULL);
  if (f != NULL) {
    char line[256];
    EXPECT(fgets(line, sizeof line, f) != NULL && line[0] == '#');
    EXPECT(fgets(line, sizeof line, f) != NULL && strcmp(line, "a,p_hat,ci_low,ci_high,g_n\n") == 0);
    fclose(f);
  }
  EXPECT(ergconc_run_command(config, ERGCONC_CMD_BOUNDS, "/nonexistent/dir/b.csv", 1) == ERGCONC_ERR_IO);
  EXPECT(ergconc_run_command(config, (ergconc_command)42, NULL, 1) == ERGCONC_ERR_DOMAIN);
  ergconc_config_free(config);

  EXPECT(ergconc_config_parse("{\"model\": {\"dim\": 1, \"drift\": [\"3*x\"], \"diffusion\": [[\"1\"]],"
                              " \"phi\": \"x\"}, \"n\": 100000, \"mc\": 2, \"proxies\": {\"nu_carre\": 1,"
                              " \"nu_sigma2\": 1, \"sigma_sup\": 1, \"grad_phi_sup\": 1, \"theta_lip\": 1,"
                              " \"alpha\": 0.5}}",
                              &config) == ERGCONC_OK);
  EXPECT(ergconc_run_command(config, ERGCONC_CMD_DEVIATIONS, "capi_diverged.csv", 1) == ERGCONC_ERR_DIVERGENCE);
  ergconc_config_free(config);
}

int main(void) {
  EXPECT(ergconc_version() != NULL);
  test_steps();
  test_config();
  test_bounds();
  test_montecarlo();
  test_commands();
  if (failures != 0) {
    fprintf(stderr, "%d C API check(s) failed\n", failures);
    return 1;
  }
  printf("C API checks passed\n");
  return 0;
}
