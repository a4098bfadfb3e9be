#ifndef TORSIONLAB_H
#define TORSIONLAB_H

/* Generated from the Rust sources by cbindgen; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Reflection through a diameter; the orientation class is inverted.
 */
#define TL_ACTION_CONJUGATION 0

/**
 * Rotation by half a turn; the orientation class is preserved.
 */
#define TL_ACTION_ANTIPODAL 1

/**
 * Opaque handle to a cellular model together with the parameters it was
 * built from.
 */
typedef struct TlModel TlModel;

/**
 * Status code returned by every fallible call.
 */
typedef int32_t TlStatus;

/**
 * The call succeeded.
 */
#define TL_OK 0

/**
 * A required pointer argument was null.
 */
#define TL_NULL_POINTER 1

/**
 * An argument was out of range or structurally invalid.
 */
#define TL_INVALID_ARGUMENT 2

/**
 * The invariant is not defined for this model.
 */
#define TL_UNSUPPORTED 3

/**
 * The computation failed numerically.
 */
#define TL_NUMERIC 4

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static nul-terminated string.
 */
const char *tl_version(void);

/**
 * Message for the most recent failure on this thread.  The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *tl_last_error(void);

/**
 * Unit interval of length `mu` subdivided into `subdiv` edges.
 * Returns null and sets the error message on failure.
 */
struct TlModel *tl_model_interval(size_t subdiv, double mu);

/**
 * Circle of circumference `mu` subdivided into `subdiv` edges
 * (`subdiv >= 3`).  Returns null and sets the error message on failure.
 */
struct TlModel *tl_model_circle(size_t subdiv, double mu);

/**
 * Two-cell complex whose first homology is cyclic of order `order`
 * (`order >= 2`).  Returns null and sets the error message on failure.
 */
struct TlModel *tl_model_moore(uint64_t order);

/**
 * Product of two circles with the given subdivisions and circumferences.
 * Returns null and sets the error message on failure.
 */
struct TlModel *tl_model_torus(size_t subdiv_a, double mu_a, size_t subdiv_b, double mu_b);

/**
 * Circle with an order-two symmetry: `action` is one of
 * `TL_ACTION_CONJUGATION` or `TL_ACTION_ANTIPODAL`, and `subdiv` must be
 * even.  Returns null and sets the error message on failure.
 */
struct TlModel *tl_model_equivariant_circle(int32_t action, size_t subdiv, double mu);

/**
 * Releases a handle.  Passing null is a no-op.
 *
 * # Safety
 * `model` must be null or a handle from a `tl_model_*` constructor that
 * has not already been freed.
 */
void tl_model_free(struct TlModel *model);

/**
 * Writes the rank of the real homology in the given degree.
 *
 * # Safety
 * `model` must be a live handle from a `tl_model_*` constructor and
 * `out` must point to writable memory.
 */
TlStatus tl_model_betti(const struct TlModel *model, int64_t degree, size_t *out);

/**
 * Writes the torsion of the realified cellular complex.
 *
 * # Safety
 * `model` must be a live handle from a `tl_model_*` constructor and
 * `out` must point to writable memory.
 */
TlStatus tl_model_torsion(const struct TlModel *model, double *out);

/**
 * Writes the volume-corrected topological invariant of the model.
 *
 * # Safety
 * `model` must be a live handle from a `tl_model_*` constructor and
 * `out` must point to writable memory.
 */
TlStatus tl_model_rho_top(const struct TlModel *model, double *out);

/**
 * Writes the analytic invariant of the continuum limit the model was
 * sampled from.  Only the interval and the circle carry one.
 *
 * # Safety
 * `model` must be a live handle from a `tl_model_*` constructor and
 * `out` must point to writable memory.
 */
TlStatus tl_model_rho_an(const struct TlModel *model, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TORSIONLAB_H */
