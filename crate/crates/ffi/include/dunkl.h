#ifndef DUNKL_H
#define DUNKL_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes of the C interface.
typedef enum DunklStatus {
  DUNKL_STATUS_OK = 0,
  DUNKL_STATUS_NULL_POINTER = 1,
  DUNKL_STATUS_DOMAIN = 2,
  DUNKL_STATUS_SINGULAR_POINT = 3,
  DUNKL_STATUS_PARITY = 4,
  DUNKL_STATUS_CONVERGENCE = 5,
  DUNKL_STATUS_GRID_ASYMMETRIC = 6,
  DUNKL_STATUS_NEAR_ZERO_DIVISION = 7,
  DUNKL_STATUS_DEGREE_TOO_HIGH = 8,
  DUNKL_STATUS_REGIME = 9,
  DUNKL_STATUS_BAD_FAMILY = 10,
  DUNKL_STATUS_BUFFER_TOO_SMALL = 11,
  DUNKL_STATUS_INVALID_ARGUMENT = 12,
  DUNKL_STATUS_PANIC = 13,
} DunklStatus;

// Which function to evaluate.
typedef enum DunklKind {
  // Orthonormal polynomial `p_k`.
  DUNKL_KIND_POLY = 0,
  // `φ_k = p_k e^{-sx²/2}`.
  DUNKL_KIND_PHI = 1,
  // `ξ_k = |x|^σ φ_k`.
  DUNKL_KIND_XI = 2,
} DunklKind;

// A perturbed half-line operator.
typedef struct DunklOperator DunklOperator;

// Parameters `(σ, s)` of the weight `|x|^{2σ} e^{-sx²}`.
typedef struct DunklParams DunklParams;

// A Gaussian quadrature rule.
typedef struct DunklRule DunklRule;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null. The pointer
// stays valid until the next failing call on the same thread.
const char *dunkl_last_error_message(void);

// Creates parameters; fails with `Domain` unless `sigma > -1/2` and `s > 0`.
//
// # Safety
// `out` must be a valid pointer to writable storage.
enum DunklStatus dunkl_params_new(double sigma, double s, struct DunklParams **out);

// # Safety
// `params` must come from [`dunkl_params_new`] and not be used afterwards.
void dunkl_params_free(struct DunklParams *params);

// Eigenvalue `(2k+1+2σ)s` of `φ_k`; NaN for a null handle.
//
// # Safety
// `params` must be null or a live handle.
double dunkl_eigenvalue(const struct DunklParams *params, size_t k);

// Evaluates `p_k`, `φ_k` or `ξ_k` at `x`.
//
// # Safety
// `params` must be a live handle and `out` valid for writing.
enum DunklStatus dunkl_eval(const struct DunklParams *params,
                            size_t k,
                            double x,
                            enum DunklKind kind,
                            double *out);

// Evaluates `Σ_{j<n} coeffs[j] φ_j(x)`.
//
// # Safety
// `coeffs` must point to `n` readable values (or be null with `n == 0`).
enum DunklStatus dunkl_synthesize(const struct DunklParams *params,
                                  const double *coeffs,
                                  size_t n,
                                  double x,
                                  double *out);

// Builds the `k`-point Gaussian rule.
//
// # Safety
// `params` must be a live handle and `out` valid for writing.
enum DunklStatus dunkl_rule_new(const struct DunklParams *params, size_t k, struct DunklRule **out);

// # Safety
// `rule` must come from [`dunkl_rule_new`] and not be used afterwards.
void dunkl_rule_free(struct DunklRule *rule);

// Number of nodes; 0 for a null handle.
//
// # Safety
// `rule` must be null or a live handle.
size_t dunkl_rule_len(const struct DunklRule *rule);

// Copies the nodes (decreasing) into `buf`.
//
// # Safety
// `buf` must be valid for `cap` writes.
enum DunklStatus dunkl_rule_nodes(const struct DunklRule *rule, double *buf, size_t cap);

// Copies the weights into `buf`.
//
// # Safety
// `buf` must be valid for `cap` writes.
enum DunklStatus dunkl_rule_weights(const struct DunklRule *rule, double *buf, size_t cap);

// Normalized value of an eigenfunction estimate at one degree; `name` is
// one of `thm11_i`, `thm11_ii`, `thm11_iii`, `thm12`, `thm13_i`,
// `thm13_ii`, `root_spacing`, `lemmaF`, `lemmaG`.
//
// # Safety
// `name` must be a NUL-terminated string and `out` valid for writing.
enum DunklStatus dunkl_estimate(const struct DunklParams *params,
                                const char *name,
                                size_t k,
                                double *out);

// Solves for the operators `H - 2c₁x⁻¹ d/dx + c₂x⁻²`. Up to `cap` handles
// are written to `out`; `count` receives the number of operators found
// (0, 1 or 2). Fails with `BufferTooSmall` if `cap < count`.
//
// # Safety
// `out` must be valid for `cap` writes and `count` for one.
enum DunklStatus dunkl_solve_c1c2(double c1,
                                  double c2,
                                  double s,
                                  struct DunklOperator **out,
                                  size_t cap,
                                  size_t *count);

// # Safety
// `op` must come from [`dunkl_solve_c1c2`] and not be used afterwards.
void dunkl_operator_free(struct DunklOperator *op);

// `σ` of the conjugated oscillator; NaN for a null handle.
//
// # Safety
// `op` must be null or a live handle.
double dunkl_operator_sigma(const struct DunklOperator *op);

// Eigenvalue `(4k+1+2σ)s`; NaN for a null handle.
//
// # Safety
// `op` must be null or a live handle.
double dunkl_operator_eigenvalue(const struct DunklOperator *op, size_t k);

// Value of the `k`-th normalized eigenfunction at `x > 0`.
//
// # Safety
// `op` must be a live handle and `out` valid for writing.
enum DunklStatus dunkl_operator_eigenfunction(const struct DunklOperator *op,
                                              size_t k,
                                              double x,
                                              double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DUNKL_H */
