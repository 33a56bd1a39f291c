#ifndef NCERG_H
#define NCERG_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum NcergStatus {
  NCERG_STATUS_OK = 0,
  NCERG_STATUS_NULL_POINTER = 1,
  NCERG_STATUS_INVALID_ARGUMENT = 2,
  NCERG_STATUS_SHAPE_MISMATCH = 3,
  NCERG_STATUS_NUMERICAL = 4,
  NCERG_STATUS_SCENARIO = 5,
  NCERG_STATUS_IO = 6,
  NCERG_STATUS_BUFFER_TOO_SMALL = 7,
  NCERG_STATUS_UTF8 = 8,
  NCERG_STATUS_PANIC = 9,
} NcergStatus;

/**
 * Opaque operator handle.
 */
typedef struct NcergOperator NcergOperator;

/**
 * Opaque semigroup handle.
 */
typedef struct NcergSemigroup NcergSemigroup;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *ncerg_version(void);

/**
 * Message of the last failure on this thread, or NULL. Valid until the next
 * failing call on the same thread.
 */
const char *ncerg_last_error_message(void);

/**
 * Diagonal operator on the algebra ⊕ M_{dims[k]} with trace weights
 * `weights[k]`; `values` lists the block diagonals in order.
 *
 * # Safety
 * Pointers must reference arrays of the stated lengths.
 */
enum NcergStatus ncerg_operator_diagonal(const size_t *dims,
                                         const double *weights,
                                         size_t nblocks,
                                         const double *values,
                                         size_t nvalues,
                                         struct NcergOperator **out);

/**
 * Operator from row-major block entries, concatenated block by block.
 * `im` may be NULL for a real operator.
 *
 * # Safety
 * `re` (and `im` when not NULL) must hold `nentries` values.
 */
enum NcergStatus ncerg_operator_from_blocks(const size_t *dims,
                                            const double *weights,
                                            size_t nblocks,
                                            const double *re,
                                            const double *im,
                                            size_t nentries,
                                            struct NcergOperator **out);

/**
 * Release an operator handle. NULL is ignored.
 *
 * # Safety
 * `op` must come from this library and not be used afterwards.
 */
void ncerg_operator_free(struct NcergOperator *op);

/**
 * Number of complex entries over all blocks.
 *
 * # Safety
 * `op` must be a live handle.
 */
enum NcergStatus ncerg_operator_len(const struct NcergOperator *op, size_t *out);

/**
 * Copy the row-major block entries into `re` and `im` (capacity entries
 * each). `out_len` receives the required length; too small a capacity
 * yields `BufferTooSmall`.
 *
 * # Safety
 * `re` and `im` must hold `capacity` values.
 */
enum NcergStatus ncerg_operator_entries(const struct NcergOperator *op,
                                        double *re,
                                        double *im,
                                        size_t capacity,
                                        size_t *out_len);

/**
 * Weighted trace τ(x); writes the real and imaginary parts.
 *
 * # Safety
 * `op` must be a live handle; the outputs must be writable.
 */
enum NcergStatus ncerg_operator_trace(const struct NcergOperator *op,
                                      double *out_re,
                                      double *out_im);

/**
 * ‖x‖_p for 1 ≤ p ≤ ∞ (pass INFINITY for the operator norm).
 *
 * # Safety
 * `op` must be a live handle.
 */
enum NcergStatus ncerg_operator_norm_p(const struct NcergOperator *op, double p, double *out);

/**
 * Norm given by a JSON descriptor such as `{"kind":"lorentz","phi":{"name":"power","alpha":0.5}}`.
 *
 * # Safety
 * `descriptor` must be a NUL-terminated string.
 */
enum NcergStatus ncerg_operator_norm_json(const struct NcergOperator *op,
                                          const char *descriptor,
                                          double *out);

/**
 * The rearrangement μ(x) as pieces: μ equals `values[i]` on
 * `[ends[i-1], ends[i])` with `ends[-1] = 0`, and 0 after the last end.
 *
 * # Safety
 * `ends` and `values` must hold `capacity` values.
 */
enum NcergStatus ncerg_operator_mu(const struct NcergOperator *op,
                                   double *ends,
                                   double *values,
                                   size_t capacity,
                                   size_t *out_len);

/**
 * Build a semigroup from a JSON family spec, e.g. `{"family":"heat_cycle","n":8}`.
 *
 * # Safety
 * `spec` must be a NUL-terminated string.
 */
enum NcergStatus ncerg_semigroup_from_json(const char *spec, struct NcergSemigroup **out);

/**
 * Release a semigroup handle. NULL is ignored.
 *
 * # Safety
 * `sg` must come from this library and not be used afterwards.
 */
void ncerg_semigroup_free(struct NcergSemigroup *sg);

/**
 * Number of parameters d of the semigroup.
 *
 * # Safety
 * `sg` must be a live handle.
 */
enum NcergStatus ncerg_semigroup_dim(const struct NcergSemigroup *sg, size_t *out);

/**
 * A_t(x) in closed form.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum NcergStatus ncerg_average_phi1(const struct NcergSemigroup *sg,
                                    const struct NcergOperator *x,
                                    double t,
                                    struct NcergOperator **out);

/**
 * A_t(x) by Gauss–Legendre quadrature; `error_estimate` (nullable)
 * receives the gap to a rule with four more points per axis.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum NcergStatus ncerg_average_quadrature(const struct NcergSemigroup *sg,
                                          const struct NcergOperator *x,
                                          double t,
                                          size_t order,
                                          struct NcergOperator **out,
                                          double *error_estimate);

/**
 * Run a JSON scenario held in memory. The report is returned through
 * `out_report` (release with [`ncerg_string_free`]) and the process-style
 * exit code (0, or 2 on a bound violation) through `out_exit_code`.
 * `has_seed = false` keeps the scenario's own seed.
 *
 * # Safety
 * `scenario` must be a NUL-terminated string; outputs must be writable.
 */
enum NcergStatus ncerg_run_scenario_json(const char *scenario,
                                         bool has_seed,
                                         uint64_t seed,
                                         char **out_report,
                                         int32_t *out_exit_code);

/**
 * Release a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void ncerg_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NCERG_H */
