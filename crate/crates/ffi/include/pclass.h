#ifndef PCLASS_H
#define PCLASS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes. The first four match the command-line exit codes.
 */
typedef enum PclassStatus {
  PCLASS_STATUS_OK = 0,
  PCLASS_STATUS_ANOMALY = 1,
  PCLASS_STATUS_USAGE = 2,
  PCLASS_STATUS_INTERNAL = 3,
  PCLASS_STATUS_NULL_POINTER = 4,
  PCLASS_STATUS_PANIC = 5,
} PclassStatus;

/**
 * Opaque per-prime report.
 */
typedef struct PclassReport PclassReport;

/**
 * Pipeline options. Zero in `level`, `cap` or `precision` selects the default;
 * `depth` is used as given.
 */
typedef struct PclassOptions {
  uint32_t level;
  uint32_t cap;
  uint32_t precision;
  uint32_t depth;
} PclassOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

struct PclassOptions pclass_options_default(void);

/**
 * Analyze prime `p`. On success `*out` receives a report handle.
 *
 * # Safety
 * `options` must be null or point to a valid `PclassOptions`; `out` must be a
 * valid pointer to writable storage for one handle.
 */
enum PclassStatus pclass_analyze(uint64_t p,
                                 const struct PclassOptions *options,
                                 struct PclassReport **out);

/**
 * Release a report. Null is ignored.
 *
 * # Safety
 * `report` must be null or a handle from [`pclass_analyze`] not yet freed.
 */
void pclass_report_free(struct PclassReport *report);

/**
 * The report as JSON, owned by the handle.
 *
 * # Safety
 * `report` must be a live handle or null (which yields null).
 */
const char *pclass_report_json(const struct PclassReport *report);

/**
 * # Safety
 * `report` must be a live handle or null (which yields 0).
 */
uint64_t pclass_report_prime(const struct PclassReport *report);

/**
 * Index of irregularity `r(p)`.
 *
 * # Safety
 * `report` must be a live handle or null (which yields 0).
 */
uint32_t pclass_report_r(const struct PclassReport *report);

/**
 * # Safety
 * `report` must be a live handle or null (which yields 0).
 */
uint32_t pclass_report_lambda(const struct PclassReport *report);

/**
 * `nu`, or -1 when it was not determined.
 *
 * # Safety
 * `report` must be a live handle or null (which yields -1).
 */
int64_t pclass_report_nu(const struct PclassReport *report);

/**
 * # Safety
 * `report` must be a live handle or null (which yields 0).
 */
size_t pclass_report_flag_count(const struct PclassReport *report);

/**
 * Exit class of the report, as a status.
 *
 * # Safety
 * `report` must be a live handle or null (which yields `NullPointer`).
 */
enum PclassStatus pclass_report_status(const struct PclassReport *report);

/**
 * Message of the last failure on this thread; empty if none. Valid until the
 * next failing call on the same thread.
 */
const char *pclass_last_error(void);

/**
 * Library version as a static string.
 */
const char *pclass_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PCLASS_H */
