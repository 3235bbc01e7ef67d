#ifndef QUAKENET_QUAKENET_H
#define QUAKENET_QUAKENET_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  ifdef QUAKENET_BUILDING
#    define QN_API __declspec(dllexport)
#  else
#    define QN_API __declspec(dllimport)
#  endif
#else
#  define QN_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qn_status {
  QN_OK = 0,
  QN_ERR_INVALID_ARGUMENT,
  QN_ERR_CONFIG,
  QN_ERR_PARSE,
  QN_ERR_DATA,
  QN_ERR_MISSING_ARTIFACT,
  QN_ERR_DIVERGED,
  QN_ERR_DIMENSION,
  QN_ERR_NUMERIC,
  QN_ERR_IO,
  QN_ERR_INTERNAL
} qn_status;

typedef struct qn_pipeline qn_pipeline;
typedef struct qn_network qn_network;

/* Message for the most recent failure on the calling thread ("" if none). */
QN_API const char* qn_last_error(void);

/* Process exit code for a status: 0 ok, 2 config/parse, 3 missing artifact,
   4 divergence, 1 anything else. */
QN_API int qn_exit_code(qn_status status);

QN_API const char* qn_version(void);

/* config_path may be NULL for built-in defaults (synthetic catalog). */
QN_API qn_status qn_pipeline_open(const char* config_path, qn_pipeline** out);
QN_API void qn_pipeline_free(qn_pipeline* pipeline);
QN_API qn_status qn_pipeline_set_seed(qn_pipeline* pipeline, uint64_t seed);
QN_API qn_status qn_pipeline_set_output_dir(qn_pipeline* pipeline, const char* dir);

/* command: "synth", "ingest", "compare" or "train-final". */
QN_API qn_status qn_pipeline_run(qn_pipeline* pipeline, const char* command);

/* Renders report tables; n == 0 means <output_dir>/report.json. */
QN_API qn_status qn_pipeline_report(qn_pipeline* pipeline, const char* const* paths, size_t n);

/* Text produced by the last successful run/report; owned by the handle and
   valid until the next call on it. */
QN_API const char* qn_pipeline_output(const qn_pipeline* pipeline);

QN_API qn_status qn_network_load(const char* path, qn_network** out);
QN_API void qn_network_free(qn_network* network);
QN_API size_t qn_network_input_width(const qn_network* network);
QN_API size_t qn_network_output_width(const qn_network* network);
QN_API size_t qn_network_parameter_count(const qn_network* network);
QN_API qn_status qn_network_forward(const qn_network* network, const double* input, size_t input_len, double* output,
                                    size_t output_len);

/* Row-major rows x cols matrices. */
QN_API qn_status qn_metrics_mse(const double* predictions, const double* targets, size_t rows, size_t cols,
                                double* out);
QN_API qn_status qn_metrics_nmse(const double* predictions, const double* targets, size_t rows, size_t cols,
                                 double* out);

#ifdef __cplusplus
}
#endif

#endif
