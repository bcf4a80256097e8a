#ifndef XPLAB_H
#define XPLAB_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Check outcome codes, matching the report strings PASS, FAIL and
 * INCONCLUSIVE.
 */
typedef enum XplabCheckStatus {
  XPLAB_CHECK_STATUS_PASS = 0,
  XPLAB_CHECK_STATUS_FAIL = 1,
  XPLAB_CHECK_STATUS_INCONCLUSIVE = 2,
} XplabCheckStatus;

typedef enum XplabStatus {
  XPLAB_STATUS_OK = 0,
  XPLAB_STATUS_NULL_POINTER = 1,
  XPLAB_STATUS_INVALID_UTF8 = 2,
  XPLAB_STATUS_DOMAIN = 3,
  XPLAB_STATUS_PRECISION = 4,
  XPLAB_STATUS_RANGE = 5,
  XPLAB_STATUS_TOLERANCE = 6,
  XPLAB_STATUS_STRUCTURAL = 7,
  XPLAB_STATUS_BUDGET = 8,
  XPLAB_STATUS_OUT_OF_BOUNDS = 9,
  XPLAB_STATUS_PANIC = 10,
} XplabStatus;

/**
 * Opaque job configuration.
 */
typedef struct XplabConfig XplabConfig;

/**
 * Opaque verification report.
 */
typedef struct XplabReport XplabReport;

typedef struct XplabSummary {
  size_t total;
  size_t pass;
  size_t fail;
  size_t inconclusive;
  /**
   * Process exit status the command line tool would use.
   */
  int32_t exit_code;
} XplabSummary;

typedef struct XplabGenus {
  uint64_t p;
  int64_t genus;
  double volume;
  uint64_t group_order;
  uint64_t cusps;
} XplabGenus;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failing call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *xplab_last_error(void);

/**
 * Library version as a static string.
 */
const char *xplab_version(void);

/**
 * A configuration with default settings.
 */
struct XplabConfig *xplab_config_new(void);

/**
 * # Safety
 * `cfg` must be null or a handle from [`xplab_config_new`] not yet freed.
 */
void xplab_config_free(struct XplabConfig *cfg);

/**
 * Applies one setting with the same keys as the INI file: `p`, `delta`,
 * `tol`, `height_bound`, `jobs`, `seed`, `out`, `const.NAME`, or any
 * subcommand option such as `check`, `r`, `R` and `set`.
 *
 * # Safety
 * `cfg` must be a live handle; `key` and `value` NUL-terminated strings.
 */
enum XplabStatus xplab_config_set(struct XplabConfig *cfg, const char *key, const char *value);

/**
 * Reads settings from an INI file into `cfg`.
 *
 * # Safety
 * `cfg` must be a live handle and `path` a NUL-terminated string.
 */
enum XplabStatus xplab_config_load_ini(struct XplabConfig *cfg, const char *path);

/**
 * Validates `cfg` without running anything.
 *
 * # Safety
 * `cfg` must be a live handle.
 */
enum XplabStatus xplab_config_validate(const struct XplabConfig *cfg);

/**
 * Runs `verify <target>` (geometry, repulsion, volume or multiplicity) and
 * stores a new report handle in `*out`. Check failures are part of the
 * report; only invalid input makes this call fail.
 *
 * # Safety
 * `cfg` must be a live handle, `target` a NUL-terminated string and `out`
 * a valid place to write a pointer.
 */
enum XplabStatus xplab_verify(const struct XplabConfig *cfg,
                              const char *target,
                              struct XplabReport **out);

/**
 * # Safety
 * `report` must be null or a handle from [`xplab_verify`] not yet freed.
 */
void xplab_report_free(struct XplabReport *report);

/**
 * # Safety
 * `report` must be a live handle and `out` writable.
 */
enum XplabStatus xplab_report_summary(const struct XplabReport *report, struct XplabSummary *out);

/**
 * Status and both sides of check `index`. `lhs` and `rhs` may be null.
 *
 * # Safety
 * `report` must be a live handle and `status` writable.
 */
enum XplabStatus xplab_report_check(const struct XplabReport *report,
                                    size_t index,
                                    enum XplabCheckStatus *status,
                                    double *lhs,
                                    double *rhs);

/**
 * The report body as JSON, identical to the command line output. Free the
 * string with [`xplab_string_free`].
 *
 * # Safety
 * `report` must be a live handle and `out` writable.
 */
enum XplabStatus xplab_report_json(const struct XplabReport *report, char **out);

/**
 * The report as CSV. Free the string with [`xplab_string_free`].
 *
 * # Safety
 * `report` must be a live handle and `out` writable.
 */
enum XplabStatus xplab_report_csv(const struct XplabReport *report, char **out);

/**
 * # Safety
 * `s` must be null or a string returned by this library not yet freed.
 */
void xplab_string_free(char *s);

/**
 * Genus, volume and counts for `X(p)`.
 *
 * # Safety
 * `out` must be writable.
 */
enum XplabStatus xplab_genus(uint64_t p, struct XplabGenus *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* XPLAB_H */
