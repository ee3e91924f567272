#ifndef BUBBLESTAB_H
#define BUBBLESTAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BsStatus {
  BS_STATUS_OK = 0,
  BS_STATUS_NULL_POINTER = 1,
  BS_STATUS_INVALID_ARGUMENT = 2,
  BS_STATUS_INVALID_DOMAIN = 3,
  BS_STATUS_POINT_OUTSIDE = 4,
  BS_STATUS_NUMERICAL_FAILURE = 5,
  BS_STATUS_NOT_AVAILABLE = 6,
  BS_STATUS_PANIC = 7,
} BsStatus;

typedef enum BsIdentity {
  BS_IDENTITY_FUNDAMENTAL = 0,
  BS_IDENTITY_SBT = 1,
  BS_IDENTITY_HEINTZE_KARCHER = 2,
  BS_IDENTITY_WPS = 3,
  BS_IDENTITY_WPS_CENTER_OF_MASS = 4,
  BS_IDENTITY_VOLUME = 5,
  BS_IDENTITY_MINKOWSKI = 6,
  BS_IDENTITY_DEFICIT_EQUIVALENCE = 7,
} BsIdentity;

/**
 * Opaque star-shaped domain.
 */
typedef struct BsDomain BsDomain;

/**
 * Opaque torsion solution on a domain.
 */
typedef struct BsField BsField;

typedef struct BsGeometry {
  double area;
  double perimeter;
  double h0;
  double diameter;
  double r_interior;
  double r_exterior;
  double center_of_mass_x;
  double center_of_mass_y;
} BsGeometry;

typedef struct BsIdentityResult {
  double lhs;
  double rhs;
  double residual_abs;
  double residual_rel;
  /**
   * Zero when the identity's hypotheses fail on this domain.
   */
  int32_t applicable;
} BsIdentityResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the next call.
 */
const char *bs_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *bs_version(void);

/**
 * Disk of the given radius about the origin.
 *
 * # Safety
 * `out` must be valid for writing one pointer.
 */
enum BsStatus bs_domain_disk(double radius, struct BsDomain **out);

/**
 * Axis-aligned ellipse about the origin.
 *
 * # Safety
 * `out` must be valid for writing one pointer.
 */
enum BsStatus bs_domain_ellipse(double semi_x, double semi_y, struct BsDomain **out);

/**
 * `ρ(θ) = 1 + t cos kθ`.
 *
 * # Safety
 * `out` must be valid for writing one pointer.
 */
enum BsStatus bs_domain_perturbed_disk(double t, size_t k, struct BsDomain **out);

/**
 * `ρ(θ) = base + Σ cos_coeffs[k-1] cos kθ + Σ sin_coeffs[k-1] sin kθ` about `(cx, cy)`.
 *
 * # Safety
 * Coefficient arrays must be valid for their lengths (or null with length 0);
 * `out` must be valid for writing one pointer.
 */
enum BsStatus bs_domain_fourier(double base_radius,
                                const double *cos_coeffs,
                                size_t n_cos,
                                const double *sin_coeffs,
                                size_t n_sin,
                                double cx,
                                double cy,
                                struct BsDomain **out);

/**
 * # Safety
 * `domain` must be null or a handle from a `bs_domain_*` constructor not yet freed.
 */
void bs_domain_free(struct BsDomain *domain);

/**
 * # Safety
 * `domain` must be a live handle and `out` valid for writing.
 */
enum BsStatus bs_domain_geometry(const struct BsDomain *domain, struct BsGeometry *out);

/**
 * Solves `Δu = 2`, `u = 0` on the boundary with `n_radial × n_angular` quadratic elements.
 *
 * # Safety
 * `domain` must be a live handle and `out` valid for writing one pointer.
 */
enum BsStatus bs_solve(const struct BsDomain *domain,
                       size_t n_radial,
                       size_t n_angular,
                       struct BsField **out);

/**
 * # Safety
 * `field` must be null or a handle from [`bs_solve`] not yet freed.
 */
void bs_field_free(struct BsField *field);

/**
 * Value and gradient at `(x, y)`; `grad` receives two doubles and may be null.
 *
 * # Safety
 * `field` must be a live handle; `value` valid for one double, `grad` null or valid for two.
 */
enum BsStatus bs_field_evaluate(const struct BsField *field,
                                double x,
                                double y,
                                double *value,
                                double *grad);

/**
 * `max |∇u|` over the mesh quadrature and boundary samples.
 *
 * # Safety
 * `field` must be a live handle and `out` valid for writing.
 */
enum BsStatus bs_field_max_gradient(const struct BsField *field, double *out);

/**
 * Number of local minimum points of `u`.
 *
 * # Safety
 * `field` must be a live handle and `out` valid for writing.
 */
enum BsStatus bs_field_min_point_count(const struct BsField *field, size_t *out);

/**
 * Minimum point `index` (deepest first) into `xy[0..2]`.
 *
 * # Safety
 * `field` must be a live handle and `xy` valid for two doubles.
 */
enum BsStatus bs_field_min_point(const struct BsField *field, size_t index, double *xy);

/**
 * Nodal L∞ error against the closed-form solution; `BS_STATUS_NOT_AVAILABLE` without one.
 *
 * # Safety
 * `field` must be a live handle and `out` valid for writing.
 */
enum BsStatus bs_field_nodal_error(const struct BsField *field, double *out);

/**
 * Evaluates one integral identity, given as a `BsIdentity` value, on the solution.
 *
 * # Safety
 * `field` must be a live handle and `out` valid for writing.
 */
enum BsStatus bs_field_identity(const struct BsField *field,
                                int32_t identity,
                                struct BsIdentityResult *out);

/**
 * Supremum of the boundary-gradient factor f(κ) in dimension `n`; `derived` selects
 * the mode differentiated from the annulus solution, otherwise the printed formula.
 *
 * # Safety
 * `value` must be valid for writing; `discrepancy` may be null.
 */
enum BsStatus bs_f_sup(size_t n, int32_t derived, double *value, int32_t *discrepancy);

/**
 * Full analysis of a domain (identities, spectral, stability) as a JSON string.
 * Release the string with [`bs_string_free`].
 *
 * # Safety
 * `domain` must be a live handle; `domain_id` null or NUL-terminated; `out` valid for writing.
 */
enum BsStatus bs_analyze_json(const struct BsDomain *domain,
                              const char *domain_id,
                              size_t n_radial,
                              size_t n_angular,
                              char **out);

/**
 * # Safety
 * `s` must be null or a string returned by this library and not yet freed.
 */
void bs_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BUBBLESTAB_H */
