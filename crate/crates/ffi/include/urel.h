#ifndef UREL_H
#define UREL_H

/* Generated by cbindgen from the urel-ffi crate; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every API call.
typedef enum UrelStatus {
  // The call succeeded.
  UREL_STATUS_OK = 0,
  // A pointer was null, a string was not UTF-8, or a value was rejected
  // by validation.
  UREL_STATUS_INVALID_INPUT = 1,
  // The computation failed on valid input (state left the admissible
  // region, grid violated the stability bound, ...).
  UREL_STATUS_DOMAIN = 2,
  // An internal panic was caught at the boundary.
  UREL_STATUS_PANIC = 3,
} UrelStatus;

// Initial data profile (opaque).
typedef struct UrelData UrelData;

// Closed-form solution of the linearized system (opaque).
typedef struct UrelLinear UrelLinear;

// Completed simulation (opaque).
typedef struct UrelSim UrelSim;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the most recent error on this thread. The pointer stays valid
// until the next failing call on the same thread. Never null.
const char *urel_last_error(void);

// Static version string of the library.
const char *urel_version(void);

// Constant initial state; fails unless |b| < a.
//
// # Safety
// `out` must be a valid pointer. On success it receives a handle that must
// be released with `urel_data_free`.
enum UrelStatus urel_data_constant(double a, double b, struct UrelData **out);

// Piecewise constant initial state: `n_edges` interior jump radii in
// increasing order and `n_edges + 1` values of a and b per interval.
//
// # Safety
// `edges` must point to `n_edges` readable doubles, `a_values` and
// `b_values` to `n_edges + 1` each; `out` as in `urel_data_constant`.
enum UrelStatus urel_data_piecewise_constant(const double *edges,
                                             size_t n_edges,
                                             const double *a_values,
                                             const double *b_values,
                                             struct UrelData **out);

// Releases a data handle. Null is ignored.
//
// # Safety
// `data` must have come from this library and not been freed before.
void urel_data_free(struct UrelData *data);

// Runs the scheme on [0, x_star] x [0, t_star] with 2N time steps,
// capturing a snapshot at each requested time (`times` may be null when
// `n_times` is zero).
//
// # Safety
// `data` must be a live handle, `times` readable for `n_times` doubles and
// `out` a valid pointer; the returned handle must be released with
// `urel_sim_free`.
enum UrelStatus urel_sim_run(const struct UrelData *data,
                             double t_star,
                             double x_star,
                             size_t n,
                             const double *times,
                             size_t n_times,
                             struct UrelSim **out);

// Releases a simulation handle. Null is ignored.
//
// # Safety
// `sim` must have come from this library and not been freed before.
void urel_sim_free(struct UrelSim *sim);

// Grid actually used by a run: time step, cell width and the mesh ratio.
//
// # Safety
// `sim` must be a live handle; each non-null out pointer must be writable.
enum UrelStatus urel_sim_grid(const struct UrelSim *sim, double *dt, double *dx, double *lambda);

// Number of nodes in snapshot `k`, or in the final level when `k` is
// `SIZE_MAX`.
//
// # Safety
// `sim` must be a live handle and `len` writable.
enum UrelStatus urel_sim_len(const struct UrelSim *sim, size_t k, size_t *len);

// Copies snapshot `k` (or the final level when `k` is `SIZE_MAX`) into the
// caller's arrays: node radii and conserved values. Each destination may be
// null to skip that field; `capacity` is the length of every non-null
// destination and must cover the level.
//
// # Safety
// `sim` must be a live handle; every non-null destination must be writable
// for `capacity` doubles.
enum UrelStatus urel_sim_copy(const struct UrelSim *sim,
                              size_t k,
                              double *xs,
                              double *a,
                              double *b,
                              size_t capacity);

// Closed-form solution of the linearized system for the given data.
//
// # Safety
// `data` must be a live handle and `out` writable; the returned handle must
// be released with `urel_linear_free`.
enum UrelStatus urel_linear_new(const struct UrelData *data, struct UrelLinear **out);

// Releases a linear solution handle. Null is ignored.
//
// # Safety
// `linear` must have come from this library and not been freed before.
void urel_linear_free(struct UrelLinear *linear);

// Evaluates the linearized solution at (t, x), t >= 0, x > 0.
//
// # Safety
// `linear` must be a live handle; non-null `a` and `b` must be writable.
enum UrelStatus urel_linear_eval(const struct UrelLinear *linear,
                                 double t,
                                 double x,
                                 double *a,
                                 double *b);

// Runs a named property suite ("lemmas", "stationary", "linear" or "all")
// and reports how many properties failed.
//
// # Safety
// `selector` must be a nul-terminated string and `failed` writable.
enum UrelStatus urel_verify(const char *selector, size_t *failed);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* UREL_H */
