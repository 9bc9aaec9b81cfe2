/*
 * C interface to the tglm regression library.
 *
 * All objects are opaque handles owned by the caller and released with the
 * matching *_free function. Every fallible call returns a tglm_status; on
 * failure tglm_last_error() describes the problem. Error and warning state is
 * per thread. Strings returned through char** are released with
 * tglm_string_free().
 */
#ifndef TGLM_TGLM_H
#define TGLM_TGLM_H

#include <stddef.h>
#include <stdint.h>

#if defined(TGLM_BUILDING_LIBRARY)
#define TGLM_API __attribute__((visibility("default")))
#else
#define TGLM_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tglm_status {
  TGLM_OK = 0,
  TGLM_ERR_INVALID_ARGUMENT = 1,
  TGLM_ERR_PARSE = 2,
  TGLM_ERR_DATA = 3,
  TGLM_ERR_NUMERIC = 4,
  TGLM_ERR_VERSION = 5,
  TGLM_ERR_IO = 6,
  TGLM_ERR_INTERNAL = 7
} tglm_status;

typedef enum tglm_family {
  TGLM_FAMILY_LOGISTIC = 0,
  TGLM_FAMILY_LINEAR = 1,
  TGLM_FAMILY_POISSON = 2
} tglm_family;

typedef enum tglm_format { TGLM_FORMAT_TABLE = 0, TGLM_FORMAT_JSON = 1 } tglm_format;

typedef enum tglm_scale { TGLM_SCALE_RESPONSE = 0, TGLM_SCALE_LINK = 1 } tglm_scale;

/* What the EM step adds to the squared coefficient before updating the prior
 * scale: nothing (exact posterior mode) or the current posterior variance. */
typedef enum tglm_em_variance { TGLM_EM_PLUG_IN = 0, TGLM_EM_POSTERIOR = 1 } tglm_em_variance;

typedef struct tglm_table tglm_table;
typedef struct tglm_model tglm_model;
typedef struct tglm_cv_report tglm_cv_report;

TGLM_API const char* tglm_version(void);
TGLM_API const char* tglm_last_error(void);
TGLM_API const char* tglm_status_string(tglm_status status);

/* Warnings raised by the most recent call on this thread. */
TGLM_API size_t tglm_warning_count(void);
TGLM_API const char* tglm_warning(size_t index);

TGLM_API void tglm_string_free(char* s);

/* ---- tables ------------------------------------------------------------ */

typedef struct tglm_ingest_options {
  const char* outcome; /* NULL or "" for prediction inputs */
  const char* trials;  /* NULL: every row is one trial */
  const char* kinds;   /* "col=numeric;col2=categorical;col3=binary" or NULL */
} tglm_ingest_options;

TGLM_API tglm_status tglm_table_read_file(const char* path, const tglm_ingest_options* options,
                                          tglm_table** out);
TGLM_API tglm_status tglm_table_read_buffer(const char* data, size_t size, const tglm_ingest_options* options,
                                            tglm_table** out);
TGLM_API void tglm_table_free(tglm_table* table);
TGLM_API size_t tglm_table_rows(const tglm_table* table);
TGLM_API size_t tglm_table_columns(const tglm_table* table);

/* ---- fitting ----------------------------------------------------------- */

typedef struct tglm_fit_options {
  tglm_family family;
  int standardize;            /* default 1 */
  int add_missing_indicators; /* default 1 */
  int intercept;              /* default 1 */
  double prior_scale;         /* default 2.5; INFINITY for flat */
  double prior_df;            /* default 1 (Cauchy); INFINITY for normal */
  double intercept_scale;     /* default 10 */
  double intercept_df;        /* default 1 */
  int max_iter;               /* default 100 */
  double tol;                 /* default 1e-8 */
  tglm_em_variance em_variance;
} tglm_fit_options;

TGLM_API void tglm_fit_options_init(tglm_fit_options* options);

/* Builds the design recipe on `table`, fits, and keeps both in the model.
 * A fit that stops at max_iter succeeds with a warning. */
TGLM_API tglm_status tglm_fit(const tglm_table* table, const tglm_fit_options* options, tglm_model** out);
TGLM_API void tglm_model_free(tglm_model* model);

TGLM_API tglm_status tglm_model_render(const tglm_model* model, tglm_format format, char** out);
TGLM_API tglm_status tglm_model_from_json(const char* data, size_t size, tglm_model** out);

TGLM_API size_t tglm_model_coef_count(const tglm_model* model);
/* Standardized-scale estimate and standard error; `name` stays valid for the
 * lifetime of the model. */
TGLM_API tglm_status tglm_model_coef(const tglm_model* model, size_t index, const char** name, double* estimate,
                                     double* std_error);
TGLM_API int tglm_model_converged(const tglm_model* model);
TGLM_API int tglm_model_iterations(const tglm_model* model);

/* Writes tglm_table_rows(table) values to `out`. Missing source columns fail
 * with TGLM_ERR_DATA and are all named in the error. */
TGLM_API tglm_status tglm_predict(const tglm_model* model, const tglm_table* table, tglm_scale scale, double* out,
                                  size_t out_size);

/* ---- cross-validation -------------------------------------------------- */

/* `grid` is "df:scale,...,flat,bbr"; NULL selects the default grid. `names`
 * may be NULL. */
TGLM_API tglm_status tglm_cv_run(const tglm_table* const* tables, const char* const* names, size_t count,
                                 const char* grid, size_t folds, uint64_t seed, tglm_cv_report** out);
TGLM_API void tglm_cv_report_free(tglm_cv_report* report);

/* Per-fold and pooled rows. With several datasets a leading dataset column
 * is added. */
TGLM_API tglm_status tglm_cv_report_csv(const tglm_cv_report* report, char** out);
/* Pooled rows per dataset plus corpus aggregates (equal and size weighted). */
TGLM_API tglm_status tglm_cv_summary_csv(const tglm_cv_report* report, char** out);
/* Grid point with the lowest mean log score (equal-weight across datasets). */
TGLM_API tglm_status tglm_cv_best(const tglm_cv_report* report, char** label, double* mean_log_score);

#ifdef __cplusplus
}
#endif

#endif /* TGLM_TGLM_H */
