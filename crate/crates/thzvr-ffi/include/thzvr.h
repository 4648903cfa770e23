#ifndef THZVR_H
#define THZVR_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes shared by every function.
 */
typedef enum ThzStatus {
  THZ_STATUS_OK = 0,
  THZ_STATUS_NULL_POINTER = 1,
  THZ_STATUS_INVALID_UTF8 = 2,
  THZ_STATUS_PARSE = 3,
  THZ_STATUS_CONFIG = 4,
  THZ_STATUS_MODEL = 5,
  THZ_STATUS_DATA = 6,
  THZ_STATUS_IO = 7,
  THZ_STATUS_PANIC = 8,
} ThzStatus;

/**
 * Validated network configuration.
 */
typedef struct ThzConfig ThzConfig;

/**
 * Guaranteed-LoS end-to-end delay distribution.
 */
typedef struct ThzLosReport ThzLosReport;

/**
 * Pooled statistics from a batch of simulated sessions.
 */
typedef struct ThzSimSummary {
  uint64_t runs;
  uint64_t total_requests;
  double mean_e2e;
  double mean_e2e_stderr;
  double plos;
  double session_max_median;
} ThzSimSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Loads a shipped preset (`table2_1thz` or `table2_0p2thz`).
 *
 * # Safety
 * `name` must be a NUL-terminated string; `out` must be valid for writes.
 * On success `*out` owns a handle to release with [`thz_config_free`].
 */
enum ThzStatus thz_config_preset(const char *name, struct ThzConfig **out);

/**
 * Parses and validates a TOML configuration document.
 *
 * # Safety
 * `toml` must be a NUL-terminated string; `out` must be valid for writes.
 * On success `*out` owns a handle to release with [`thz_config_free`].
 */
enum ThzStatus thz_config_from_toml(const char *toml, struct ThzConfig **out);

/**
 * Releases a configuration handle. Null is a no-op.
 *
 * # Safety
 * `config` must be null or a handle not yet freed.
 */
void thz_config_free(struct ThzConfig *config);

/**
 * Sets the bandwidth in Hz; the handle is unchanged if validation fails.
 *
 * # Safety
 * `config` must be a live handle.
 */
enum ThzStatus thz_config_set_bandwidth(struct ThzConfig *config, double hz);

/**
 * Writes the 16-hex-digit parameter hash as a new string.
 *
 * # Safety
 * `config` must be a live handle; `out` must be valid for writes. Free the
 * string with [`thz_string_free`].
 */
enum ThzStatus thz_config_params_hash(const struct ThzConfig *config, char **out);

/**
 * Tail value-at-risk of the end-to-end delay, in seconds.
 *
 * # Safety
 * `config` must be a live handle; `out` must be valid for writes.
 */
enum ThzStatus thz_tail_tvar(const struct ThzConfig *config, double alpha_c, double *out);

/**
 * Tail-based reliability `P(delay <= delta)` under blockage.
 *
 * # Safety
 * `config` must be a live handle; `out` must be valid for writes.
 */
enum ThzStatus thz_tail_reliability(const struct ThzConfig *config, double delta, double *out);

/**
 * Computes the guaranteed-LoS delay distribution.
 *
 * # Safety
 * `config` must be a live handle; `out` must be valid for writes. Release
 * the report with [`thz_los_report_free`].
 */
enum ThzStatus thz_los_analyze(const struct ThzConfig *config, struct ThzLosReport **out);

/**
 * Reliability `P(delay <= delta)` from a guaranteed-LoS report.
 *
 * # Safety
 * `report` must be a live handle; `out` must be valid for writes.
 */
enum ThzStatus thz_los_reliability(const struct ThzLosReport *report, double delta, double *out);

/**
 * Releases a report handle. Null is a no-op.
 *
 * # Safety
 * `report` must be null or a handle not yet freed.
 */
void thz_los_report_free(struct ThzLosReport *report);

/**
 * Simulates `runs` sessions with seeds `seed, seed + 1, ...`.
 *
 * # Safety
 * `config` must be a live handle; `out` must be valid for writes.
 */
enum ThzStatus thz_simulate(const struct ThzConfig *config,
                            uint64_t runs,
                            uint64_t seed,
                            struct ThzSimSummary *out);

/**
 * Copy of the calling thread's last error message, or null if none.
 *
 * Free the result with [`thz_string_free`].
 */
char *thz_last_error_message(void);

/**
 * Frees a string returned by this library. Null is a no-op.
 *
 * # Safety
 * `s` must be null or a string from this library not yet freed.
 */
void thz_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* THZVR_H */
