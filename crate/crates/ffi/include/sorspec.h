#ifndef SORSPEC_H
#define SORSPEC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes shared by all functions.
typedef enum SorspecStatus {
  SORSPEC_STATUS_OK = 0,
  SORSPEC_STATUS_NULL_POINTER = 1,
  SORSPEC_STATUS_INVALID_ARGUMENT = 2,
  SORSPEC_STATUS_DOMAIN = 3,
  SORSPEC_STATUS_CAPABILITY = 4,
  SORSPEC_STATUS_ACCURACY = 5,
  SORSPEC_STATUS_INAPPLICABLE = 6,
  SORSPEC_STATUS_NOT_CONVERGED = 7,
  SORSPEC_STATUS_IO = 8,
  SORSPEC_STATUS_PANIC = 9,
} SorspecStatus;

// Opaque handle to a validated metric profile.
typedef struct SorspecProfile SorspecProfile;

// Eigen-solver settings; see [`sorspec_solver_config_default`].
typedef struct SorspecSolverConfig {
  uintptr_t n_initial;
  uintptr_t n_max;
  double rel_tol;
  bool use_richardson;
} SorspecSolverConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread; empty after success.
// The pointer stays valid until the next library call on the same thread.
const char *sorspec_last_error(void);

// Default solver settings.
struct SorspecSolverConfig sorspec_solver_config_default(void);

// Creates a builtin profile (`"canonical"` or `"paper-example"`).
//
// # Safety
// `name` must be a NUL-terminated string; `out` must be writable.
enum SorspecStatus sorspec_profile_builtin(const char *name, struct SorspecProfile **out);

// Creates a profile from its JSON description.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum SorspecStatus sorspec_profile_from_json(const char *json, struct SorspecProfile **out);

// Releases a profile. Null is ignored.
//
// # Safety
// `p` must come from a profile constructor and not be freed twice.
void sorspec_profile_free(struct SorspecProfile *p);

// Gauss curvature K(x) = -f''(x)/2 for x in [-1, 1].
//
// # Safety
// `p` must be a live handle; `out` must be writable.
enum SorspecStatus sorspec_curvature_at(const struct SorspecProfile *p, double x, double *out);

// ∫ f^l dx. A non-positive `abs_tol` selects the default tolerance.
//
// # Safety
// `p` must be a live handle; `out` must be writable.
enum SorspecStatus sorspec_moment(const struct SorspecProfile *p,
                                  uint32_t l,
                                  double abs_tol,
                                  double *out);

// ∫ f^l K dx. A non-positive `abs_tol` selects the default tolerance.
//
// # Safety
// `p` must be a live handle; `out` must be writable.
enum SorspecStatus sorspec_curvature_moment(const struct SorspecProfile *p,
                                            uint32_t l,
                                            double abs_tol,
                                            double *out);

// The `count` lowest eigenvalues of mode `k`, written to `values[0..count]`.
// `errors` (may be null) receives the error estimates and `converged` (may
// be null) whether every estimate met the tolerance.
//
// # Safety
// `p` must be a live handle; `values` (and `errors` if non-null) must hold
// `count` doubles.
enum SorspecStatus sorspec_eigenvalues(const struct SorspecProfile *p,
                                       int64_t k,
                                       uintptr_t count,
                                       struct SorspecSolverConfig cfg,
                                       double *values,
                                       double *errors,
                                       bool *converged);

// λ_k^1.
//
// # Safety
// `p` must be a live handle; `out` must be writable.
enum SorspecStatus sorspec_first_eigenvalue(const struct SorspecProfile *p,
                                            int64_t k,
                                            struct SorspecSolverConfig cfg,
                                            double *out);

// Upper bound for λ_m from the trial exponent `l`.
//
// # Safety
// `p` must be a live handle; `out` must be writable.
enum SorspecStatus sorspec_ray_bound(const struct SorspecProfile *p,
                                     uint32_t m,
                                     uint32_t l,
                                     double abs_tol,
                                     double *out);

// Ray bound with l = m.
//
// # Safety
// `p` must be a live handle; `out` must be writable.
enum SorspecStatus sorspec_sharp_bound(const struct SorspecProfile *p,
                                       uint32_t m,
                                       double abs_tol,
                                       double *out);

// Ray bound with l = 1.
//
// # Safety
// `p` must be a live handle; `out` must be writable.
enum SorspecStatus sorspec_rough_bound(const struct SorspecProfile *p,
                                       uint32_t m,
                                       double abs_tol,
                                       double *out);

// m² + ∫fK/(2∫f); fails with `Inapplicable` when ∫f < 2.
//
// # Safety
// `p` must be a live handle; `out` must be writable.
enum SorspecStatus sorspec_negative_curvature_bound(const struct SorspecProfile *p,
                                                    uint32_t m,
                                                    double abs_tol,
                                                    double *out);

// Distinct eigenvalues up to index `m_target` as a JSON document. A
// non-positive `merge_tol` selects the default tolerance.
//
// # Safety
// `p` must be a live handle; `out` must be writable. Free the string with
// [`sorspec_string_free`].
enum SorspecStatus sorspec_spectrum_json(const struct SorspecProfile *p,
                                         uintptr_t m_target,
                                         struct SorspecSolverConfig cfg,
                                         double merge_tol,
                                         char **out);

// Trace report for mode `k` with `terms` eigenvalues as a JSON document.
//
// # Safety
// `p` must be a live handle; `out` must be writable. Free the string with
// [`sorspec_string_free`].
enum SorspecStatus sorspec_trace_json(const struct SorspecProfile *p,
                                      int64_t k,
                                      uintptr_t terms,
                                      struct SorspecSolverConfig cfg,
                                      char **out);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not be freed twice.
void sorspec_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SORSPEC_H */
