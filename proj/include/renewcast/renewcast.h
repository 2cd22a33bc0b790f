/* renewcast C API.
 *
 * Every function returns an rc_status (0 on success). On failure the message
 * for the calling thread is available from rc_last_error() until the next
 * call on that thread. Handles are opaque and must be released with the
 * matching *_free function; freeing NULL is a no-op.
 */
#ifndef RENEWCAST_H
#define RENEWCAST_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define RC_API __declspec(dllexport)
#else
#define RC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef int rc_status;

enum {
  RC_OK = 0,
  RC_INVALID_ARGUMENT = 1,
  RC_MISSING_COLUMN = 2,
  RC_DUPLICATE_TIMESTAMP = 3,
  RC_EMPTY_FILE = 4,
  RC_NO_OVERLAP = 5,
  RC_FREQUENCY_MISMATCH = 6,
  RC_ALL_MISSING_COLUMN = 7,
  RC_ALL_COLUMNS_DROPPED = 8,
  RC_EMPTY_TRAIN_RANGE = 9,
  RC_UNFITTED_COLUMN = 10,
  RC_TARGET_MISSING_IN_TRAIN = 11,
  RC_NO_TIMESTAMP = 12,
  RC_STILL_NON_STATIONARY = 13,
  RC_ZERO_VARIANCE_TARGET = 14,
  RC_TOO_FEW_SAMPLES = 15,
  RC_SINGULAR_DESIGN = 16,
  RC_TOO_SHORT = 17,
  RC_DEGENERATE_SERIES = 18,
  RC_LENGTH_MISMATCH = 19,
  RC_DIMENSION_MISMATCH = 20,
  RC_SHAPE_MISMATCH = 21,
  RC_SEQUENCE_TOO_SHORT = 22,
  RC_DIVERGENCE_DETECTED = 23,
  RC_INVALID_SPEC = 24,
  RC_NON_CONVERGENCE = 25,
  RC_INVALID_ORDERS = 26,
  RC_ALL_TRIALS_DIVERGED = 27,
  RC_SPLIT_TOO_SMALL = 28,
  RC_TOO_FEW_FOLDS = 29,
  RC_IO_ERROR = 30,
  RC_CONFIG_INVALID = 31,
  RC_DATASET_MISSING = 32,
  RC_PARSE_ERROR = 33,
  RC_INTERNAL = 99
};

/* Process exit codes used by the command-line tool. */
enum { RC_EXIT_OK = 0, RC_EXIT_FAILED_CELLS = 1, RC_EXIT_CONFIG = 2 };

RC_API const char* rc_version(void);
RC_API const char* rc_status_name(rc_status status);
/* Message of the last failed call on this thread; "" if none. */
RC_API const char* rc_last_error(void);
/* Payload of the last failure (config field, column name, path); "" if none. */
RC_API const char* rc_last_error_detail(void);

/* ------------------------------------------------------------------------ */
/* Run configuration and execution                                          */

typedef struct rc_config rc_config;
typedef void (*rc_log_fn)(const char* line, void* user);

/* Parses and validates a JSON run configuration. */
RC_API rc_status rc_config_from_json(const char* json, rc_config** out);
RC_API void rc_config_free(rc_config* config);
/* Normalized JSON of the configuration. The string stays valid until the
 * handle is freed or this is called again. */
RC_API rc_status rc_config_to_json(rc_config* config, const char** json);

/* Runs the configured command. exit_code receives the process exit contract:
 * 0 success, 1 failed cells, 2 configuration error. */
RC_API rc_status rc_execute(const rc_config* config, rc_log_fn log, void* user, int* exit_code);

/* ------------------------------------------------------------------------ */
/* Tables                                                                   */

typedef struct rc_table rc_table;

/* spec_json keys: n_rows, seasonal [[period, amplitude], ...], trend_slope,
 * noise_std, missing_rate, gap_max_len, seed. */
RC_API rc_status rc_table_synthetic(const char* spec_json, rc_table** out);
RC_API rc_status rc_table_load_csv(const char* path, const char* schema_json, rc_table** out);
RC_API void rc_table_free(rc_table* table);
RC_API rc_status rc_table_shape(const rc_table* table, size_t* rows, size_t* columns);
RC_API rc_status rc_table_column_name(const rc_table* table, size_t index, const char** name);
/* Copies a numeric column; missing cells become NaN. */
RC_API rc_status rc_table_column(const rc_table* table, const char* name, double* out, size_t capacity);

/* ------------------------------------------------------------------------ */
/* Statistics                                                               */

typedef struct {
  double adf_stat, adf_pvalue;
  int adf_lags;
  double kpss_stat, kpss_pvalue;
  int stationary; /* joint verdict at the 5% level */
} rc_stationarity;

RC_API rc_status rc_stationarity_test(const double* series, size_t n, rc_stationarity* out);
RC_API rc_status rc_mutual_information(const double* x, const double* y, size_t n, size_t bins, double* out);
RC_API rc_status rc_confidence_interval(const double* samples, size_t k, double* mean, double* half_width);
/* scores is row-major blocks x treatments. */
RC_API rc_status rc_friedman(const double* scores, size_t blocks, size_t treatments, int lower_is_better,
                             double* chi_squared, int* df, double* p_value);

/* ------------------------------------------------------------------------ */
/* Models                                                                   */

typedef struct rc_model rc_model;

/* token: "lstm", "reg_dnn", ... (neural families only). */
RC_API rc_status rc_model_build(const char* token, size_t lookback, size_t features, uint64_t seed,
                                rc_model** out);
RC_API rc_status rc_model_load(const char* path, rc_model** out);
RC_API rc_status rc_model_save(const rc_model* model, const char* path);
RC_API void rc_model_free(rc_model* model);
RC_API rc_status rc_model_parameter_count(const rc_model* model, size_t* count);
/* windows is row-major n x lookback x features; out receives n values. */
RC_API rc_status rc_model_predict(rc_model* model, const double* windows, size_t n, double* out);

#ifdef __cplusplus
}
#endif

#endif /* RENEWCAST_H */
