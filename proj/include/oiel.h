/* C interface to the oiel abundance estimators.
 *
 * Every function that can fail returns an oiel_status; on failure the
 * message is available from oiel_last_error() on the calling thread until
 * the next call into the library. Strings handed out through char** belong
 * to the caller and are released with oiel_string_free(). */
#ifndef OIEL_H
#define OIEL_H

#include <stddef.h>
#include <stdint.h>

#if defined(OIEL_BUILDING_LIBRARY)
#define OIEL_API __attribute__((visibility("default")))
#else
#define OIEL_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum oiel_status {
  OIEL_OK = 0,
  OIEL_E_INVALID_ARGUMENT = 1,
  OIEL_E_DOMAIN = 2,
  OIEL_E_PARSE = 3,
  OIEL_E_TRUNCATION = 4,
  OIEL_E_SINGULAR_DESIGN = 5,
  OIEL_E_SEPARATION = 6,
  OIEL_E_INFEASIBLE = 7,
  OIEL_E_DEGENERATE = 8,
  OIEL_E_SINGULAR_INFORMATION = 9,
  OIEL_E_UNSUPPORTED = 10,
  OIEL_E_IO = 11,
  OIEL_E_INTERNAL = 12
} oiel_status;

typedef enum oiel_format { OIEL_FORMAT_JSON = 0, OIEL_FORMAT_TABLE = 1 } oiel_format;

enum {
  OIEL_METHOD_EL = 1u << 0,
  OIEL_METHOD_NO_INFLATION = 1u << 1,
  OIEL_METHOD_CL = 1u << 2,
  OIEL_METHOD_SCORE = 1u << 3,
  OIEL_METHOD_SCORE_CL = 1u << 4
};

typedef struct oiel_dataset oiel_dataset;
typedef struct oiel_fit oiel_fit;

typedef struct oiel_em_options {
  double tol;          /* stop when one EM sweep gains less than this */
  int max_iter;
  double n_max_factor; /* abundance search is capped at n_max_factor * n */
} oiel_em_options;

typedef struct oiel_sim_options {
  char scenario; /* 'A' or 'B' */
  int n0;
  double w0;
  int reps;
  uint64_t seed;
  double level;
  int threads;      /* 0: one per hardware thread */
  unsigned methods; /* OIEL_METHOD_* bits */
  int raw;          /* include per-replication records */
  int qq;           /* include QQ plot columns */
} oiel_sim_options;

OIEL_API const char* oiel_version(void);
OIEL_API const char* oiel_last_error(void);
OIEL_API const char* oiel_status_name(oiel_status status);
OIEL_API void oiel_string_free(char* s);

OIEL_API void oiel_em_options_init(oiel_em_options* options);
OIEL_API void oiel_sim_options_init(oiel_sim_options* options);

/* trials is K for binomial data and 0 otherwise */
OIEL_API oiel_status oiel_dataset_read_csv(const char* path, int trials, oiel_dataset** out);
/* covariates is row-major n x p and excludes the intercept */
OIEL_API oiel_status oiel_dataset_from_arrays(const int* counts, const double* covariates,
                                             size_t n, size_t p, int trials,
                                             oiel_dataset** out);
OIEL_API oiel_status oiel_dataset_write_csv(const oiel_dataset* data, const char* path);
OIEL_API oiel_status oiel_dataset_info(const oiel_dataset* data, size_t* n, size_t* ones,
                                      size_t* covariates);
OIEL_API void oiel_dataset_free(oiel_dataset* data);

/* form: "ztoi", "oizt" or "none"; family: "binomial", "poisson" or
 * "geometric". options may be NULL. */
OIEL_API oiel_status oiel_fit_create(const oiel_dataset* data, const char* form,
                                    const char* family, const oiel_em_options* options,
                                    oiel_fit** out);
OIEL_API oiel_status oiel_fit_estimates(const oiel_fit* fit, double* n_hat, double* w_hat,
                                       double* alpha_hat, double* loglik);
/* writes min(len, dim) coefficients; dim receives the full length */
OIEL_API oiel_status oiel_fit_beta(const oiel_fit* fit, double* beta, size_t len, size_t* dim);
OIEL_API oiel_status oiel_el_ratio(const oiel_fit* fit, double n, double* value);
OIEL_API void oiel_fit_free(oiel_fit* fit);

/* estimates, standard errors and both confidence intervals */
OIEL_API oiel_status oiel_fit_report(const oiel_fit* fit, double level, oiel_format format,
                                    char** out);
OIEL_API oiel_status oiel_ci_report(const oiel_fit* fit, double level, oiel_format format,
                                   char** out);
OIEL_API oiel_status oiel_gof_report(const oiel_fit* fit, oiel_format format, char** out);

/* which: "s", "se", "sc" or "all" */
OIEL_API oiel_status oiel_test_report(const oiel_dataset* data, const char* which,
                                     const char* family, const oiel_em_options* options,
                                     oiel_format format, char** out);

OIEL_API oiel_status oiel_simulate(const oiel_sim_options* options, oiel_format format,
                                  char** out);

#ifdef __cplusplus
}
#endif

#endif
