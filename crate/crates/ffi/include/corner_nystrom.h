#ifndef CORNER_NYSTROM_H
#define CORNER_NYSTROM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes.
typedef enum CnStatus {
  CN_STATUS_OK = 0,
  CN_STATUS_INVALID_ARGUMENT = 1,
  CN_STATUS_NULL_POINTER = 2,
  CN_STATUS_NUMERICAL = 3,
  CN_STATUS_SINGULAR = 4,
  CN_STATUS_UNSUPPORTED = 5,
  CN_STATUS_PANIC = 6,
} CnStatus;

// A solved example.
typedef struct CnSolution CnSolution;

// Inputs of a solve. Fill with `cn_params_default` and adjust.
typedef struct CnParams {
  // Example id, 1 to 5.
  uint32_t example;
  // Interior quadrature nodes per arc.
  uint32_t m;
  double c;
  double epsilon;
  // Tangent-deviation bound used to split off the corner arms.
  double delta;
  // Interior angle for examples 4 and 5; ignored otherwise.
  double phi;
  // Eliminate the second corner unknown.
  bool constrained;
  // Apply the near-corner modification.
  bool modified;
} CnParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. The pointer stays
// valid until the next call on the same thread.
const char *cn_last_error_message(void);

// Writes the example's default parameters for `m` nodes to `params`. For
// examples 4 and 5 `phi` is the interior angle; it is ignored otherwise.
enum CnStatus cn_params_default(uint32_t example, uint32_t m, double phi, struct CnParams *params);

// Solves an example with a reference solution (1 to 3) and stores a new
// handle in `solution`.
enum CnStatus cn_solve(const struct CnParams *params, struct CnSolution **solution);

// Releases a handle. NULL is accepted.
void cn_solution_free(struct CnSolution *solution);

// Supremum of the density interpolant over the boundary.
enum CnStatus cn_solution_psi_norm(const struct CnSolution *solution, double *value);

// Infinity-norm condition number of the system matrix; computed on the
// first call and cached.
enum CnStatus cn_solution_cond_inf(struct CnSolution *solution, double *value);

// `max |A a − b|` and `|a_{1,0} − a_{2,0}|` of the solve.
enum CnStatus cn_solution_diagnostics(const struct CnSolution *solution,
                                      double *residual_inf,
                                      double *corner_mismatch);

// Potential at an interior point.
enum CnStatus cn_solution_evaluate(const struct CnSolution *solution,
                                   double x,
                                   double y,
                                   double *value);

// Reference solution of the solved example at `(x, y)`.
enum CnStatus cn_solution_reference(const struct CnSolution *solution,
                                    double x,
                                    double y,
                                    double *value);

// Density interpolant on arc `arc` (1 to 3) at `s` in [0, 1].
enum CnStatus cn_solution_density(const struct CnSolution *solution,
                                  uint32_t arc,
                                  double s,
                                  double *value);

// Copies the `3(m+2)` nodal densities, arc by arc, into `buffer`. The count
// is always written to `needed`; a NULL or short buffer only reports it.
enum CnStatus cn_solution_nodal_values(const struct CnSolution *solution,
                                       double *buffer,
                                       size_t len,
                                       size_t *needed);

// Writes the `m+2` nodes and weights of the Lobatto rule. Both buffers must
// hold at least `m+2` values.
enum CnStatus cn_lobatto_rule(uint32_t m, double *nodes, double *weights, size_t len);

// Condition number of example 4 or 5 at interior angle `phi`.
enum CnStatus cn_family_condition(const struct CnParams *params, double *value);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CORNER_NYSTROM_H */
