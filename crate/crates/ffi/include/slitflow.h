#ifndef SLITFLOW_H
#define SLITFLOW_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SfStatus {
  SF_STATUS_OK = 0,
  /**
   * Argument outside its domain, such as `c` outside `(-1, 1)`.
   */
  SF_STATUS_DOMAIN = 2,
  /**
   * Certification failed at the working precision.
   */
  SF_STATUS_PRECISION = 3,
  /**
   * A configured size limit was exceeded.
   */
  SF_STATUS_RESOURCE = 4,
  SF_STATUS_IO = 5,
  SF_STATUS_NULL_POINTER = 6,
  SF_STATUS_PANIC = 7,
} SfStatus;

/**
 * A Birkhoff trace of the sheet indicator.
 */
typedef struct SfBirkhoff SfBirkhoff;

/**
 * The surface with slit `(1 + c) b`, `c = c_num / c_den`.
 */
typedef struct SfSurface SfSurface;

typedef struct SfCheckpoint {
  uint64_t n;
  /**
   * Orbit points `i < n` on sheet 0.
   */
  uint64_t hits;
  uint64_t flips;
} SfCheckpoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread; do not free.
 */
const char *sf_last_error(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed already.
 */
void sf_string_free(char *s);

/**
 * Library version, static storage.
 */
const char *sf_version(void);

/**
 * Convergent `p_k / q_k` of `alpha = [1, 4, 9, ...]` as decimal strings.
 *
 * # Safety
 * `p_out` and `q_out` must be valid for writes.
 */
enum SfStatus sf_convergent(uint64_t k, char **p_out, char **q_out);

/**
 * # Safety
 * `out` must be valid for writes.
 */
enum SfStatus sf_surface_new(int64_t c_num, int64_t c_den, struct SfSurface **out);

/**
 * # Safety
 * `surface` must come from [`sf_surface_new`] and not be used afterwards.
 */
void sf_surface_free(struct SfSurface *surface);

/**
 * Enclosure of the slit width `b_c` with width at most `2^-bits`, as
 * outward-rounded decimal strings.
 *
 * # Safety
 * `surface` must be a live handle; `lo_out` and `hi_out` valid for writes.
 */
enum SfStatus sf_surface_slit_width(const struct SfSurface *surface,
                                    uint32_t bits,
                                    char **lo_out,
                                    char **hi_out);

/**
 * Stage records `k_min..=k_max` as a JSON array.
 *
 * # Safety
 * `surface` must be a live handle; `json_out` valid for writes.
 */
enum SfStatus sf_stages_json(const struct SfSurface *surface,
                             uint64_t k_min,
                             uint64_t k_max,
                             char **json_out);

/**
 * Iterates the skew rotation from `(start_num / start_den, sheet 0)` for `n`
 * steps with the default checkpoint schedule.
 *
 * # Safety
 * `surface` must be a live handle; `out` valid for writes.
 */
enum SfStatus sf_birkhoff_run(const struct SfSurface *surface,
                              int64_t start_num,
                              int64_t start_den,
                              uint64_t n,
                              struct SfBirkhoff **out);

/**
 * Number of checkpoints, 0 for a null handle.
 *
 * # Safety
 * `trace` must be null or a live handle.
 */
size_t sf_birkhoff_len(const struct SfBirkhoff *trace);

/**
 * # Safety
 * `trace` must be a live handle; `out` valid for writes.
 */
enum SfStatus sf_birkhoff_checkpoint(const struct SfBirkhoff *trace,
                                     size_t index,
                                     struct SfCheckpoint *out);

/**
 * # Safety
 * `trace` must come from [`sf_birkhoff_run`] and not be used afterwards.
 */
void sf_birkhoff_free(struct SfBirkhoff *trace);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SLITFLOW_H */
