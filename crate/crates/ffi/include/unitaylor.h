#ifndef UNITAYLOR_H
#define UNITAYLOR_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum UtStatus {
  UT_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  UT_STATUS_NULL_POINTER = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  UT_STATUS_INVALID_UTF8 = 2,
  /**
   * Malformed JSON or a document that violates the schema.
   */
  UT_STATUS_INVALID_INPUT = 3,
  /**
   * Dimensions or indices out of range for the object.
   */
  UT_STATUS_INVALID_ARGUMENT = 4,
  /**
   * The numerical engine gave up (budget, conditioning, sampling limits).
   */
  UT_STATUS_NUMERICAL = 5,
  /**
   * The verifier refused to compare mismatched artifacts.
   */
  UT_STATUS_REFUSED = 6,
  /**
   * A Rust panic was caught at the boundary.
   */
  UT_STATUS_PANIC = 7,
} UtStatus;

/**
 * Sealed construction certificate.
 */
typedef struct UtCertificate UtCertificate;

/**
 * Stream, certificate and fit reports of one constructor run.
 */
typedef struct UtConstruction UtConstruction;

/**
 * Sparse multivariate polynomial in parameters w and variables z.
 */
typedef struct UtPoly UtPoly;

/**
 * Append-only coefficient stream produced by the constructor.
 */
typedef struct UtStream UtStream;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null after a success.
 * The pointer stays valid until the next call into this library on the same
 * thread.
 */
const char *ut_last_error_message(void);

/**
 * Crate version as a static NUL-terminated string.
 */
const char *ut_version(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed already.
 */
void ut_string_free(char *s);

/**
 * Parses a polynomial from its JSON term list. Dimensions are inferred from
 * the exponent lengths.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum UtStatus ut_poly_from_json(const char *json, struct UtPoly **out);

/**
 * Serializes a polynomial to its JSON term list.
 *
 * # Safety
 * `poly` must be a live handle; `out` must be writable.
 */
enum UtStatus ut_poly_to_json(const struct UtPoly *poly, char **out);

/**
 * Parameter dimension r, or 0 for a null handle.
 *
 * # Safety
 * `poly` must be null or a live handle.
 */
size_t ut_poly_r(const struct UtPoly *poly);

/**
 * Variable dimension d, or 0 for a null handle.
 *
 * # Safety
 * `poly` must be null or a live handle.
 */
size_t ut_poly_d(const struct UtPoly *poly);

/**
 * Evaluates at (w, z). `w` holds 2r doubles, `z` holds 2d doubles, `out`
 * receives 2 doubles.
 *
 * # Safety
 * Pointers must reference arrays of the stated lengths.
 */
enum UtStatus ut_poly_eval(const struct UtPoly *poly,
                           const double *w,
                           const double *z,
                           double *out);

/**
 * Taylor coefficient of z -> p(w, z) about `zeta` at multi-index `m`
 * (`m` holds d exponents).
 *
 * # Safety
 * Pointers must reference arrays of the stated lengths.
 */
enum UtStatus ut_poly_gamma(const struct UtPoly *poly,
                            const double *w,
                            const double *zeta,
                            const uint32_t *m,
                            double *out);

/**
 * Releases a polynomial. Null is ignored.
 *
 * # Safety
 * `poly` must come from this library and not have been freed already.
 */
void ut_poly_free(struct UtPoly *poly);

/**
 * Parses a coefficient stream document.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum UtStatus ut_stream_from_json(const char *json, struct UtStream **out);

/**
 * Serializes a coefficient stream.
 *
 * # Safety
 * `stream` must be a live handle; `out` must be writable.
 */
enum UtStatus ut_stream_to_json(const struct UtStream *stream, char **out);

/**
 * Evaluates the n-th partial sum of the stream at (w, z).
 *
 * # Safety
 * Pointers must reference arrays of the stated lengths.
 */
enum UtStatus ut_stream_partial_sum_eval(const struct UtStream *stream,
                                         uint64_t n,
                                         const double *w,
                                         const double *z,
                                         double *out);

/**
 * Releases a stream. Null is ignored.
 *
 * # Safety
 * `stream` must come from this library and not have been freed already.
 */
void ut_stream_free(struct UtStream *stream);

/**
 * Parses a certificate document.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum UtStatus ut_certificate_from_json(const char *json, struct UtCertificate **out);

/**
 * Serializes a certificate.
 *
 * # Safety
 * `cert` must be a live handle; `out` must be writable.
 */
enum UtStatus ut_certificate_to_json(const struct UtCertificate *cert, char **out);

/**
 * Whether the certificate records every stage as passing; false for null.
 *
 * # Safety
 * `cert` must be null or a live handle.
 */
bool ut_certificate_passed(const struct UtCertificate *cert);

/**
 * Releases a certificate. Null is ignored.
 *
 * # Safety
 * `cert` must come from this library and not have been freed already.
 */
void ut_certificate_free(struct UtCertificate *cert);

/**
 * Plans and runs a scenario. A run whose stages fail still returns `Ok` with a
 * handle; check [`ut_construction_passed`]. Errors are reserved for invalid
 * scenarios and engine failures that leave no partial result.
 *
 * # Safety
 * `scenario_json` must be a NUL-terminated string; `out` must be writable.
 */
enum UtStatus ut_construct(const char *scenario_json, struct UtConstruction **out);

/**
 * Whether every stage passed; false for null.
 *
 * # Safety
 * `c` must be null or a live handle.
 */
bool ut_construction_passed(const struct UtConstruction *c);

/**
 * Copies the constructed stream into a new handle.
 *
 * # Safety
 * `c` must be a live handle; `out` must be writable.
 */
enum UtStatus ut_construction_stream(const struct UtConstruction *c, struct UtStream **out);

/**
 * Copies the certificate into a new handle.
 *
 * # Safety
 * `c` must be a live handle; `out` must be writable.
 */
enum UtStatus ut_construction_certificate(const struct UtConstruction *c,
                                          struct UtCertificate **out);

/**
 * Releases a construction. Null is ignored.
 *
 * # Safety
 * `c` must come from this library and not have been freed already.
 */
void ut_construction_free(struct UtConstruction *c);

/**
 * Recomputes a certificate against a stream. `ok` receives the verdict and,
 * if `report_json` is non-null, it receives the full report. A mismatched
 * pair returns `Refused`.
 *
 * # Safety
 * Handles must be live; `ok` must be writable; `report_json` may be null.
 */
enum UtStatus ut_verify(const struct UtStream *stream,
                        const struct UtCertificate *cert,
                        bool *ok,
                        char **report_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* UNITAYLOR_H */
