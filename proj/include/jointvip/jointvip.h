/*
 * C interface to the jointvip library.
 *
 * Objects are opaque handles created by jvip_*_create / jvip_*_load and
 * released with the matching jvip_*_free. Every fallible call returns a
 * jvip_status; on failure the calling thread's last error (code, message and
 * a {"code","message","detail"} JSON document) can be queried until the next
 * failing call on that thread. Strings returned through char** out-params are
 * heap-allocated and must be released with jvip_string_free.
 */
#ifndef JOINTVIP_H
#define JOINTVIP_H

#include <stddef.h>

#if defined(_WIN32)
#  ifdef JOINTVIP_BUILDING
#    define JVIP_API __declspec(dllexport)
#  else
#    define JVIP_API __declspec(dllimport)
#  endif
#elif defined(__GNUC__) || defined(__clang__)
#  define JVIP_API __attribute__((visibility("default")))
#else
#  define JVIP_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

#define JVIP_VERSION "1.0.0"

typedef enum jvip_status {
  JVIP_OK = 0,
  JVIP_E_MALFORMED_CSV,
  JVIP_E_MISSING_COLUMN,
  JVIP_E_NON_NUMERIC_CELL,
  JVIP_E_MISSING_VALUE,
  JVIP_E_NON_BINARY_TREATMENT,
  JVIP_E_NON_POSITIVE_WEIGHT,
  JVIP_E_INVALID_ROLES,
  JVIP_E_INVALID_TRANSFORM,
  JVIP_E_NEGATIVE_INPUT_FOR_LOG,
  JVIP_E_INVALID_MANIFEST,
  JVIP_E_TREATED_IN_PILOT,
  JVIP_E_NO_TREATED_IN_ANALYSIS,
  JVIP_E_NO_CONTROL_IN_ANALYSIS,
  JVIP_E_ZERO_PILOT_VARIANCE,
  JVIP_E_TOO_FEW_VALUES,
  JVIP_E_ZERO_VARIANCE,
  JVIP_E_UNKNOWN_COVARIATE,
  JVIP_E_INVALID_OPTIONS,
  JVIP_E_COVARIATE_MISSING_IN_POST,
  JVIP_E_INVALID_RANGE,
  JVIP_E_IO,
  JVIP_E_INTERNAL,
  JVIP_E_INVALID_ARGUMENT, /* null handle or pointer passed in */
  JVIP_E_NO_POST_SAMPLE    /* manifest has no post_analysis_csv */
} jvip_status;

typedef enum jvip_smd_flavor {
  JVIP_SMD_CROSS_SAMPLE = 0,
  JVIP_SMD_PURE = 1
} jvip_smd_flavor;

typedef struct jvip_report_options {
  jvip_smd_flavor smd_flavor;
  int use_abs;     /* nonzero: absolute values */
  double bias_tol; /* > 0 */
} jvip_report_options;

typedef struct jvip_plot_options {
  jvip_report_options report;
  int width_px;               /* >= 100 */
  int height_px;              /* >= 100 */
  const char* title;          /* NULL: default title */
  int label_above_tol_only;   /* nonzero: label only covariates above bias_tol */
  int show_post_trails;       /* nonzero: pre -> post segments */
  const double* curve_levels; /* NULL: multiples of bias_tol */
  size_t n_curve_levels;
} jvip_plot_options;

typedef struct jvip_serve_options {
  const char* host;
  int port;
  size_t max_sessions;
  size_t max_payload_bytes;
  const char* cors_origin; /* NULL: "*" */
  /* Called once the socket is bound, with the bound port. May be NULL. */
  void (*on_ready)(int port, void* user_data);
  void* user_data;
} jvip_serve_options;

typedef struct jvip_study jvip_study;
typedef struct jvip_model jvip_model;
typedef struct jvip_post_model jvip_post_model;

JVIP_API const char* jvip_version(void);

/* Defaults: cross-sample, absolute, bias_tol 0.01. */
JVIP_API jvip_report_options jvip_report_options_default(void);
JVIP_API jvip_plot_options jvip_plot_options_default(void);
JVIP_API jvip_serve_options jvip_serve_options_default(void);

/* Stable name of a status, e.g. "TreatedInPilot". */
JVIP_API const char* jvip_status_name(jvip_status status);
JVIP_API jvip_status jvip_last_error_status(void);
JVIP_API const char* jvip_last_error_message(void);
JVIP_API const char* jvip_last_error_json(void);

JVIP_API void jvip_string_free(char* s);

/* Reads a study manifest (JSON) and the CSV files it names. */
JVIP_API jvip_status jvip_study_load_manifest(const char* manifest_path, jvip_study** out);

/* Builds a study from in-memory CSV text and a roles JSON object with keys
 * treatment, outcome, covariates, weight (optional), transforms (optional). */
JVIP_API jvip_status jvip_study_from_csv(const char* pilot_csv, const char* analysis_csv,
                                         const char* roles_json, jvip_study** out);

/* Nonzero when the manifest named a post-adjustment sample. */
JVIP_API int jvip_study_has_post(const jvip_study* study);
JVIP_API void jvip_study_free(jvip_study* study);

JVIP_API jvip_status jvip_model_create(const jvip_study* study, jvip_model** out);
JVIP_API void jvip_model_free(jvip_model* model);
JVIP_API size_t jvip_model_covariate_count(const jvip_model* model);

JVIP_API jvip_status jvip_model_to_json(const jvip_model* model, jvip_smd_flavor flavor,
                                        char** out);
JVIP_API jvip_status jvip_model_summary(const jvip_model* model, const jvip_report_options* opts,
                                        double* max_abs_bias, size_t* n_above_tol,
                                        size_t* n_plottable);
JVIP_API jvip_status jvip_model_summary_text(const jvip_model* model,
                                             const jvip_report_options* opts, char** out);
JVIP_API jvip_status jvip_model_table_text(const jvip_model* model,
                                           const jvip_report_options* opts, char** out);

/* Post-adjustment model from the manifest's post sample
 * (JVIP_E_NO_POST_SAMPLE if there is none). */
JVIP_API jvip_status jvip_post_from_study(const jvip_model* model, const jvip_study* study,
                                          jvip_post_model** out);
/* Post-adjustment model from CSV text bound with the study's roles and transforms. */
JVIP_API jvip_status jvip_post_from_csv(const jvip_model* model, const jvip_study* study,
                                        const char* post_csv, jvip_post_model** out);
JVIP_API void jvip_post_free(jvip_post_model* post);

JVIP_API jvip_status jvip_post_to_json(const jvip_post_model* post, jvip_smd_flavor flavor,
                                       char** out);
JVIP_API jvip_status jvip_post_summary_text(const jvip_post_model* post,
                                            const jvip_report_options* opts,
                                            double post_bias_tol, char** out);
JVIP_API jvip_status jvip_post_table_text(const jvip_post_model* post,
                                          const jvip_report_options* opts, char** out);

/* SVG document; `post` may be NULL for a pre-adjustment plot. */
JVIP_API jvip_status jvip_render_svg(const jvip_model* model, const jvip_post_model* post,
                                     const jvip_plot_options* opts, char** out);

/* Runs the HTTP service until the process is stopped. Returns JVIP_E_IO if
 * the address cannot be bound. */
JVIP_API jvip_status jvip_serve(const jvip_serve_options* opts);

#ifdef __cplusplus
}
#endif

#endif /* JOINTVIP_H */
