/* Exercises the shared library through its C header only. */

#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "oiel.h"

static int failures = 0;

#define EXPECT(cond)                                                   \
  do {                                                                 \
    if (!(cond)) {                                                     \
      fprintf(stderr, "%s:%d: failed: %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                      \
    }                                                                  \
  } while (0)

static oiel_dataset* load(const char* dir, const char* name, int trials) {
  char path[1024];
  snprintf(path, sizeof path, "%s/%s", dir, name);
  oiel_dataset* d = NULL;
  EXPECT(oiel_dataset_read_csv(path, trials, &d) == OIEL_OK);
  return d;
}

static void test_arrays(void) {
  const int counts[] = {2, 1, 3, 1, 1, 2};
  const double cov[] = {0.1, 0.4, -0.3, 0.9, 0.2, -0.5};
  oiel_dataset* d = NULL;
  size_t n = 0, ones = 0, p = 0;
  EXPECT(oiel_dataset_from_arrays(counts, cov, 6, 1, 0, &d) == OIEL_OK);
  EXPECT(oiel_dataset_info(d, &n, &ones, &p) == OIEL_OK);
  EXPECT(n == 6 && ones == 3 && p == 1);
  oiel_dataset_free(d);

  const int bad[] = {1, 0};
  d = NULL;
  EXPECT(oiel_dataset_from_arrays(bad, NULL, 2, 0, 0, &d) == OIEL_E_TRUNCATION);
  EXPECT(d == NULL);
  EXPECT(strlen(oiel_last_error()) > 0);
  EXPECT(oiel_dataset_from_arrays(NULL, NULL, 2, 0, 0, &d) == OIEL_E_INVALID_ARGUMENT);
  const int over[] = {1, 6};
  EXPECT(oiel_dataset_from_arrays(over, NULL, 2, 0, 5, &d) == OIEL_E_DOMAIN);
}

static void test_fit(const char* dir) {
  oiel_dataset* d = load(dir, "ztoi_poisson.csv", 0);
  oiel_fit* f = NULL;
  oiel_em_options o;
  oiel_em_options_init(&o);
  EXPECT(o.tol == 1e-5);
  EXPECT(oiel_fit_create(d, "ztoi", "poisson", &o, &f) == OIEL_OK);
  double nh = 0, w = 0, a = 0, ll = 0;
  EXPECT(oiel_fit_estimates(f, &nh, &w, &a, &ll) == OIEL_OK);
  size_t n = 0;
  EXPECT(oiel_dataset_info(d, &n, NULL, NULL) == OIEL_OK);
  EXPECT(nh > (double)n && w > 0 && w < 1 && a > 0 && a < 1 && isfinite(ll));
  double beta[4] = {0};
  size_t dim = 0;
  EXPECT(oiel_fit_beta(f, beta, 4, &dim) == OIEL_OK);
  EXPECT(dim == 2 && beta[1] != 0.0);
  double r = -1;
  EXPECT(oiel_el_ratio(f, nh, &r) == OIEL_OK);
  EXPECT(r >= 0 && r < 1e-3);
  EXPECT(oiel_el_ratio(f, 1.0, &r) == OIEL_E_INVALID_ARGUMENT);

  char* text = NULL;
  EXPECT(oiel_fit_report(f, 0.05, OIEL_FORMAT_JSON, &text) == OIEL_OK);
  EXPECT(text && strstr(text, "\"N_hat\"") && strstr(text, "\"ci_el\""));
  char* again = NULL;
  EXPECT(oiel_fit_report(f, 0.05, OIEL_FORMAT_JSON, &again) == OIEL_OK);
  EXPECT(again && strcmp(text, again) == 0);
  oiel_string_free(text);
  oiel_string_free(again);
  EXPECT(oiel_ci_report(f, 0.1, OIEL_FORMAT_TABLE, &text) == OIEL_OK);
  oiel_string_free(text);
  EXPECT(oiel_gof_report(f, OIEL_FORMAT_JSON, &text) == OIEL_OK);
  EXPECT(text && strstr(text, "\"chi2\""));
  oiel_string_free(text);
  EXPECT(oiel_fit_report(f, 2.0, OIEL_FORMAT_JSON, &text) == OIEL_E_INVALID_ARGUMENT);

  EXPECT(oiel_test_report(d, "all", "poisson", NULL, OIEL_FORMAT_JSON, &text) == OIEL_OK);
  EXPECT(text && strstr(text, "\"S_c\""));
  oiel_string_free(text);
  EXPECT(oiel_test_report(d, "xyz", "poisson", NULL, OIEL_FORMAT_JSON, &text) ==
         OIEL_E_INVALID_ARGUMENT);
  EXPECT(oiel_test_report(d, "s", "geometric", NULL, OIEL_FORMAT_JSON, &text) ==
         OIEL_E_UNSUPPORTED);

  EXPECT(oiel_fit_create(d, "zip", "poisson", NULL, &f) == OIEL_E_INVALID_ARGUMENT);
  EXPECT(oiel_fit_create(d, "ztoi", "binomial", NULL, &f) == OIEL_E_INVALID_ARGUMENT);
  oiel_fit_free(f);

  char path[1024];
  snprintf(path, sizeof path, "%s/round_trip.csv", getenv("TMPDIR") ? getenv("TMPDIR") : "/tmp");
  EXPECT(oiel_dataset_write_csv(d, path) == OIEL_OK);
  oiel_dataset* back = NULL;
  size_t n2 = 0;
  EXPECT(oiel_dataset_read_csv(path, 0, &back) == OIEL_OK);
  EXPECT(oiel_dataset_info(back, &n2, NULL, NULL) == OIEL_OK && n2 == n);
  oiel_dataset_free(back);
  remove(path);
  oiel_dataset_free(d);
  EXPECT(oiel_dataset_read_csv("/nonexistent.csv", 0, &back) == OIEL_E_IO);
}

static void test_binomial(const char* dir) {
  oiel_dataset* d = load(dir, "ztoi_binomial.csv", 17);
  oiel_fit* f = NULL;
  EXPECT(oiel_fit_create(d, "ztoi", "binomial", NULL, &f) == OIEL_OK);
  char* text = NULL;
  EXPECT(oiel_fit_report(f, 0.05, OIEL_FORMAT_TABLE, &text) == OIEL_OK);
  EXPECT(text && strstr(text, "binomial"));
  oiel_string_free(text);
  oiel_fit_free(f);
  oiel_dataset_free(d);
}

static void test_simulate(void) {
  oiel_sim_options s;
  oiel_sim_options_init(&s);
  s.scenario = 'A';
  s.n0 = 100;
  s.w0 = 0.8;
  s.reps = 4;
  s.seed = 5;
  s.methods = OIEL_METHOD_EL | OIEL_METHOD_SCORE;
  s.raw = 1;
  char *a = NULL, *b = NULL;
  EXPECT(oiel_simulate(&s, OIEL_FORMAT_JSON, &a) == OIEL_OK);
  s.threads = 2;
  EXPECT(oiel_simulate(&s, OIEL_FORMAT_JSON, &b) == OIEL_OK);
  EXPECT(a && b && strcmp(a, b) == 0);
  EXPECT(a && strstr(a, "\"seed\": 5"));
  oiel_string_free(a);
  oiel_string_free(b);
  s.scenario = 'Q';
  EXPECT(oiel_simulate(&s, OIEL_FORMAT_JSON, &a) == OIEL_E_INVALID_ARGUMENT);
}

int main(int argc, char** argv) {
  if (argc < 2) {
    fprintf(stderr, "usage: %s <fixture dir>\n", argv[0]);
    return 2;
  }
  EXPECT(strlen(oiel_version()) > 0);
  EXPECT(strcmp(oiel_status_name(OIEL_E_TRUNCATION), "truncation_violation") == 0);
  test_arrays();
  test_fit(argv[1]);
  test_binomial(argv[1]);
  test_simulate();
  printf("%s (%d failures)\n", failures ? "FAIL" : "OK", failures);
  return failures ? 1 : 0;
}
