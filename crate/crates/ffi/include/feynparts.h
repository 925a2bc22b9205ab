/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#ifndef FEYNPARTS_H
#define FEYNPARTS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes. Zero is success.
typedef enum FpStatus {
  FP_OK = 0,
  // A required pointer was null or a string was not UTF-8.
  FP_NULL_POINTER = 1,
  FP_PARSE_ERROR = 2,
  FP_INVALID_ARGUMENT = 3,
  // Basis not orthogonal, weight not admitted, arity or domain mismatch.
  FP_INCOMPATIBLE = 4,
  // Kernel without Gaussian decay under the requested parameter.
  FP_NO_DECAY = 5,
  FP_CONFIG_ERROR = 6,
  // `fp_verify_json` ran, but at least one identity failed.
  FP_CHECK_FAILED = 7,
  FP_PANIC = 8,
} FpStatus;

// An element of `L2[0, T]`.
typedef struct FpFunction FpFunction;

// A cylinder functional `F(x) = f(⟨α_1, x⟩, …, ⟨α_n, x⟩)`.
typedef struct FpFunctional FpFunctional;

typedef struct FpComplex {
  double re;
  double im;
} FpComplex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread; empty after a success.
// The pointer stays valid until the next call on the same thread.
const char *fp_last_error(void);

// Library version as a static NUL-terminated string.
const char *fp_version(void);

// Parses a function on `[0, t_end]`.
enum FpStatus fp_function_parse(const char *src, double t_end, struct FpFunction **result);

void fp_function_free(struct FpFunction *f);

enum FpStatus fp_function_eval(const struct FpFunction *f, double t, double *result);

// `(u, v)_2`.
enum FpStatus fp_inner_product(const struct FpFunction *u,
                               const struct FpFunction *v,
                               double *result);

// Builds a functional from `n` basis expressions and a kernel expression.
// The basis must be orthogonal and the kernel arity must equal `n`.
enum FpStatus fp_functional_new(const char *const *basis,
                                uintptr_t n,
                                double t_end,
                                const char *kernel,
                                struct FpFunctional **result);

void fp_functional_free(struct FpFunctional *f);

uintptr_t fp_functional_arity(const struct FpFunctional *f);

// Kernel value `f(u_1, …, u_n)`.
enum FpStatus fp_functional_eval_at(const struct FpFunctional *f,
                                    const double *u,
                                    uintptr_t n,
                                    struct FpComplex *result);

// `∫^{anf_q} F(Z_h(x, ·)) dm(x)` for real nonzero `q`.
enum FpStatus fp_feynman_integral(const struct FpFunctional *f,
                                  const char *h,
                                  double q,
                                  struct FpComplex *result);

// `E[F(λ^{-1/2} Z_h(x, ·))]` analytically continued to `Re λ > 0`.
enum FpStatus fp_analytic_wiener_integral(const struct FpFunctional *f,
                                          const char *h,
                                          struct FpComplex lambda,
                                          struct FpComplex *result);

// `T_{q,k}^{(p)}(F)` as a new functional over the same basis.
enum FpStatus fp_gfft(const struct FpFunctional *f,
                      const char *k,
                      double q,
                      double p,
                      struct FpFunctional **result);

// Runs the identity suite for a TOML configuration (null or empty for
// the defaults) and returns the JSON report through `json`, to be released
// with [`fp_string_free`]. The report is produced even when a check fails,
// in which case the status is `FP_CHECK_FAILED`.
enum FpStatus fp_verify_json(const char *config, char **json);

// Releases a string returned by this library.
void fp_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FEYNPARTS_H */
