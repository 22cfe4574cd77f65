/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#ifndef FLC_H
#define FLC_H

#include <stdbool.h>
#include <stdint.h>

typedef enum FlcStatus {
  FLC_STATUS_OK = 0,
  /**
   * Malformed configuration, descriptor or window.
   */
  FLC_STATUS_ERROR_CONFIG = 2,
  /**
   * A computation could not be carried out.
   */
  FLC_STATUS_ERROR_RUNTIME = 3,
  FLC_STATUS_NULL_ARGUMENT = 4,
  FLC_STATUS_INVALID_UTF8 = 5,
  FLC_STATUS_PANIC = 6,
} FlcStatus;

/**
 * An owned run configuration: descriptor, radii, windows and seed.
 */
typedef struct FlcRun FlcRun;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *flc_version(void);

/**
 * Message for the last failed call on this thread, or NULL. Valid until
 * the next call into the library from the same thread.
 */
const char *flc_last_error(void);

/**
 * Parses a JSON run configuration into a new handle.
 *
 * # Safety
 * `json` must be NUL-terminated; `out` must be writable.
 */
enum FlcStatus flc_run_from_json(const char *json, struct FlcRun **out);

/**
 * Default configuration for a built-in descriptor: z, z2, heisenberg,
 * composite or silver_mean.
 *
 * # Safety
 * `name` must be NUL-terminated; `out` must be writable.
 */
enum FlcStatus flc_run_from_preset(const char *name, struct FlcRun **out);

/**
 * # Safety
 * `run` must be a live handle.
 */
enum FlcStatus flc_run_set_seed(struct FlcRun *run, uint64_t seed);

/**
 * The configuration as JSON, with every default filled in.
 *
 * # Safety
 * `run` must be a live handle; `out_json` must be writable.
 */
enum FlcStatus flc_run_config(const struct FlcRun *run, char **out_json);

/**
 * Releases a handle. NULL is ignored.
 *
 * # Safety
 * `run` must come from this library and not be used afterwards.
 */
void flc_run_free(struct FlcRun *run);

/**
 * The points of the descriptor inside the sample window, as JSON.
 *
 * # Safety
 * `run` must be a live handle; `out_json` must be writable.
 */
enum FlcStatus flc_enumerate(const struct FlcRun *run, char **out_json);

/**
 * The patch catalog at the configured radius, as JSON.
 *
 * # Safety
 * `run` must be a live handle; `out_json` must be writable.
 */
enum FlcStatus flc_patches(const struct FlcRun *run, char **out_json);

/**
 * Runs a check suite (ud, flc, patches, hull, groupoid, witness or all).
 * A failed verdict is not an error: the status is `FLC_STATUS_OK` and
 * `*out_pass` is false.
 *
 * # Safety
 * `run` must be a live handle, `suite` NUL-terminated, and `out_json`,
 * `out_pass` writable.
 */
enum FlcStatus flc_check(const struct FlcRun *run,
                         const char *suite,
                         char **out_json,
                         bool *out_pass);

/**
 * Releases a string returned by the library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void flc_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FLC_H */
