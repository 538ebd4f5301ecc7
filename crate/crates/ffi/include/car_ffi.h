#ifndef CAR_FFI_H
#define CAR_FFI_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum CarStatus {
  CAR_STATUS_OK = 0,
  /**
   * Well-formed input with a negative answer: not CAR, or a mechanism or
   * multicover that fails validation.
   */
  CAR_STATUS_NEGATIVE = 1,
  CAR_STATUS_NULL_POINTER = 2,
  CAR_STATUS_INVALID_UTF8 = 3,
  CAR_STATUS_PARSE_ERROR = 4,
  CAR_STATUS_INVALID_ARGUMENT = 5,
  CAR_STATUS_BOUND_EXCEEDED = 6,
  CAR_STATUS_INTERNAL = 7,
  CAR_STATUS_PANIC = 8,
} CarStatus;

/**
 * Opaque CAR mechanism.
 */
typedef struct CarMechanismHandle CarMechanismHandle;

/**
 * Opaque uniform multicover.
 */
typedef struct CarMulticoverHandle CarMulticoverHandle;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *car_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *car_version(void);

/**
 * Releases a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void car_string_free(char *s);

/**
 * Parses a CAR mechanism from its JSON form `{"n": .., "pi": [..]}`.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum CarStatus car_mechanism_from_json(const char *json, struct CarMechanismHandle **out);

/**
 * # Safety
 * `h` must be a live handle; `out` must be writable.
 */
enum CarStatus car_mechanism_to_json(const struct CarMechanismHandle *h, char **out);

/**
 * Number of elements of the mechanism's sample space, or 0 for NULL.
 *
 * # Safety
 * `h` must be NULL or a live handle.
 */
size_t car_mechanism_size(const struct CarMechanismHandle *h);

/**
 * # Safety
 * `h` must be NULL or a handle from this library not yet freed.
 */
void car_mechanism_free(struct CarMechanismHandle *h);

/**
 * Writes whether the mechanism is extreme. When `certificate` is not NULL it
 * receives a JSON description of the extremality certificate.
 *
 * # Safety
 * `h` must be a live handle; `extreme` must be writable; `certificate` must
 * be NULL or writable.
 */
enum CarStatus car_mechanism_is_extreme(const struct CarMechanismHandle *h,
                                        bool *extreme,
                                        char **certificate);

/**
 * Checks a coarsening mechanism given as JSON. Returns `CAR_STATUS_OK` and
 * writes the collapsed CAR mechanism if it is CAR, `CAR_STATUS_NEGATIVE`
 * (with the reason in [`car_last_error`]) if it is valid but not CAR or fails
 * validation.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum CarStatus car_check_coarsening_json(const char *json, struct CarMechanismHandle **out);

/**
 * Canonical multicover generating the mechanism.
 *
 * # Safety
 * `h` must be a live handle; `out` must be writable.
 */
enum CarStatus car_mechanism_to_multicover(const struct CarMechanismHandle *h,
                                           struct CarMulticoverHandle **out);

/**
 * Writes an extreme decomposition of the mechanism as mixture JSON.
 *
 * # Safety
 * `h` must be a live handle; `out` must be writable.
 */
enum CarStatus car_mechanism_decompose_json(const struct CarMechanismHandle *h,
                                            bool allow_large,
                                            char **out);

/**
 * Parses a uniform multicover from `{"n": .., "k": .., "sets": [..]}`.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum CarStatus car_multicover_from_json(const char *json, struct CarMulticoverHandle **out);

/**
 * # Safety
 * `h` must be a live handle; `out` must be writable.
 */
enum CarStatus car_multicover_to_json(const struct CarMulticoverHandle *h, char **out);

/**
 * New handle holding the canonical form of `h`.
 *
 * # Safety
 * `h` must be a live handle; `out` must be writable.
 */
enum CarStatus car_multicover_canonicalize(const struct CarMulticoverHandle *h,
                                           struct CarMulticoverHandle **out);

/**
 * CAR mechanism generated by the multicover; `CAR_STATUS_NEGATIVE` if some
 * element is not covered exactly k times.
 *
 * # Safety
 * `h` must be a live handle; `out` must be writable.
 */
enum CarStatus car_multicover_to_mechanism(const struct CarMulticoverHandle *h,
                                           struct CarMechanismHandle **out);

/**
 * # Safety
 * `h` must be NULL or a handle from this library not yet freed.
 */
void car_multicover_free(struct CarMulticoverHandle *h);

/**
 * JSON array of every extreme CAR mechanism on `n` elements.
 *
 * # Safety
 * `out` must be writable.
 */
enum CarStatus car_enumerate_extremes_json(size_t n, bool allow_large, char **out);

/**
 * Builds S_n for odd `n` and runs every Fibonacci-height check; `passed`
 * receives the overall verdict.
 *
 * # Safety
 * `passed` must be writable.
 */
enum CarStatus car_verify_fibonacci(size_t n, bool allow_large, bool *passed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CAR_FFI_H */
