#ifndef RADIAL_SOBOLEV_H
#define RADIAL_SOBOLEV_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RsStatus {
  RS_STATUS_OK = 0,
  RS_STATUS_NULL_POINTER = 1,
  RS_STATUS_INVALID_ARGUMENT = 2,
  RS_STATUS_REGIME = 3,
  RS_STATUS_NON_CONVERGENCE = 4,
  RS_STATUS_NUMERICAL = 5,
  RS_STATUS_PANIC = 6,
} RsStatus;

typedef enum RsSpacingKind {
  RS_SPACING_KIND_UNIFORM = 0,
  RS_SPACING_KIND_GRADED = 1,
  RS_SPACING_KIND_LOG = 2,
  RS_SPACING_KIND_ALGEBRAIC = 3,
} RsSpacingKind;

typedef struct RsExtremal RsExtremal;

typedef struct RsFunction RsFunction;

typedef struct RsGrid RsGrid;

/**
 * Node law; `a` is the exponent, decades or scale, `b` the algebraic power.
 */
typedef struct RsSpacing {
  enum RsSpacingKind kind;
  double a;
  double b;
} RsSpacing;

/**
 * `(m, p, α, θ, R)`; `R = INFINITY` for the half-line.
 */
typedef struct RsParams {
  uint32_t m;
  double p;
  double alpha;
  double theta;
  double r_max;
} RsParams;

typedef struct RsHardy {
  double a_m0;
  double a_m1;
  /**
   * NaN when no closed-form bound applies
   */
  double bound_m0;
  double bound_m1;
  bool finite;
  double growth_exponent;
} RsHardy;

typedef struct RsExtremalSummary {
  double s_estimate;
  double lambda;
  double el_residual;
  double relative_residual;
  double half_mass_radius;
  size_t iterations;
  bool converged;
} RsExtremalSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. Valid until the next failing call.
 */
const char *rs_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *rs_version(void);

/**
 * # Safety
 * `out` must be valid for writes.
 */
enum RsStatus rs_grid_new(double r_max, size_t n, struct RsSpacing spacing, struct RsGrid **out);

/**
 * # Safety
 * `grid` must come from `rs_grid_new` and not be used afterwards.
 */
void rs_grid_free(struct RsGrid *grid);

/**
 * Number of nodes.
 *
 * # Safety
 * `grid` must be a live handle or null.
 */
size_t rs_grid_len(const struct RsGrid *grid);

/**
 * Copies the nodes into `out[0..len]`; `len` must equal the node count.
 *
 * # Safety
 * `out` must be valid for `len` writes.
 */
enum RsStatus rs_grid_nodes(const struct RsGrid *grid, double *out, size_t len);

/**
 * Samples on `grid` from `values[0..len]`; `dirichlet` pins the far end to zero.
 *
 * # Safety
 * `values` must be valid for `len` reads and `out` for a write.
 */
enum RsStatus rs_function_new(const struct RsGrid *grid,
                              const double *values,
                              size_t len,
                              bool dirichlet,
                              struct RsFunction **out);

/**
 * # Safety
 * `f` must come from this library and not be used afterwards.
 */
void rs_function_free(struct RsFunction *f);

/**
 * `‖u‖_{L^q_γ}`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum RsStatus rs_weighted_norm(const struct RsFunction *f, double q, double gamma, double *out);

/**
 * `‖∇^m_α u‖^p / ‖u‖^p_{L^{p*}_θ}`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum RsStatus rs_rayleigh_quotient(const struct RsParams *p,
                                   const struct RsFunction *f,
                                   double *out);

/**
 * # Safety
 * Pointers must be valid.
 */
enum RsStatus rs_critical_exponent(const struct RsParams *p, double *out);

/**
 * 0 Sobolev, 1 Trudinger–Moser, 2 Morrey, from the sign of `α_1 − p + 1`.
 */
int32_t rs_classify_regime(double p, double alpha1);

/**
 * Hardy constants with the critical target exponent; `left` selects functions vanishing
 * at the origin.
 *
 * # Safety
 * `out` must be valid for a write.
 */
enum RsStatus rs_hardy_constants(uint32_t m,
                                 double p,
                                 double gamma,
                                 double theta,
                                 bool left,
                                 double r_max,
                                 struct RsHardy *out);

/**
 * Minimizes the Rayleigh quotient from the default initial profile on `grid`. A run that
 * stops without meeting `tol_r` still yields a handle and returns `NonConvergence`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum RsStatus rs_minimize(const struct RsParams *p,
                          const struct RsGrid *grid,
                          double tol_r,
                          size_t max_iter,
                          struct RsExtremal **out);

/**
 * # Safety
 * Pointers must be valid.
 */
enum RsStatus rs_extremal_summary(const struct RsExtremal *e, struct RsExtremalSummary *out);

/**
 * Copies the gauged, normalized profile at the grid nodes.
 *
 * # Safety
 * `out` must be valid for `len` writes.
 */
enum RsStatus rs_extremal_profile(const struct RsExtremal *e, double *out, size_t len);

/**
 * # Safety
 * `e` must come from `rs_minimize` and not be used afterwards.
 */
void rs_extremal_free(struct RsExtremal *e);

/**
 * `S` implied by the shooting solution with `u(0) = u0`.
 *
 * # Safety
 * `out` must be valid for a write.
 */
enum RsStatus rs_shoot(const struct RsParams *p, double u0, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RADIAL_SOBOLEV_H */
