#ifndef SPINOR_QCRB_H
#define SPINOR_QCRB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define SQ_ENSEMBLE_PRODUCT 0

#define SQ_ENSEMBLE_GHZ 1

#define SQ_FAMILY_GENERAL 0

#define SQ_FAMILY_THREE_AMPLITUDE 1

#define SQ_FAMILY_COHERENT_THETA 2

#define SQ_METHOD_SMD 0

#define SQ_METHOD_QPT 1

// Bits of `SqEstimate::flags`.
#define SQ_FLAG_INCONSISTENT 1

#define SQ_FLAG_DEGENERATE 2

#define SQ_FLAG_OUT_OF_REGIME 4

#define SQ_FLAG_NYQUIST 8

typedef enum SqStatus {
  SQ_STATUS_OK = 0,
  SQ_STATUS_NULL_POINTER = 1,
  SQ_STATUS_INVALID_ARGUMENT = 2,
  SQ_STATUS_DOMAIN = 3,
  SQ_STATUS_VALIDATION = 4,
  SQ_STATUS_NUMERICAL = 5,
  SQ_STATUS_RESOURCE = 6,
  // The optimizer stopped at its iteration cap. The output handle is
  // still set and holds the best point found.
  SQ_STATUS_NOT_CONVERGED = 7,
  SQ_STATUS_ESTIMATION = 8,
  SQ_STATUS_BUFFER_TOO_SMALL = 9,
  SQ_STATUS_PANIC = 10,
} SqStatus;

// Result of a state optimization.
typedef struct SqOptimization SqOptimization;

// Prepared pair-basis state with its control value and bound.
typedef struct SqPairState SqPairState;

typedef struct SqBound {
  double delta_p;
  double delta_q;
} SqBound;

typedef struct SqEstimate {
  double p_hat;
  double q_hat;
  // Angular-frequency bin width.
  double resolution;
  // `SQ_FLAG_*` bits.
  uint32_t flags;
} SqEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *sq_version(void);

// Message of the last failed call on this thread, or null. The pointer stays
// valid until the next failing call on the same thread.
const char *sq_last_error_message(void);

// Joint bounds of the uniform single-atom state (`T = 1`, one trial).
enum SqStatus sq_uniform_bound(uint32_t spin,
                               uint32_t atoms,
                               uint32_t ensemble_kind,
                               struct SqBound *out);

// Joint bounds of the spin-coherent state at polar angle `theta`
// (`phi = 0`, `T = 1`, one trial).
enum SqStatus sq_coherent_bound(uint32_t spin,
                                uint32_t atoms,
                                uint32_t ensemble_kind,
                                double theta,
                                struct SqBound *out);

// Minimizes `Delta^2 p + Delta^2 q` over `family`. On `Ok` or
// `NotConverged` `*out` receives a handle to free with
// `sq_optimization_free`.
enum SqStatus sq_optimize(uint32_t spin,
                          uint32_t atoms,
                          uint32_t ensemble_kind,
                          uint32_t family_kind,
                          struct SqOptimization **out);

enum SqStatus sq_optimization_bound(const struct SqOptimization *handle, struct SqBound *out);

// Sublevel populations of the optimal state in ascending `m`. Pass a null
// `buffer` to query the length through `written`.
enum SqStatus sq_optimization_populations(const struct SqOptimization *handle,
                                          double *buffer,
                                          size_t capacity,
                                          size_t *written);

void sq_optimization_free(struct SqOptimization *handle);

// Pair-basis state from `len = N/2 + 1` amplitudes `re[k] + i im[k]`.
enum SqStatus sq_pair_state_new(size_t atoms,
                                const double *re,
                                const double *im,
                                size_t len,
                                struct SqPairState **out);

// Optimal state of the preparation `method_kind` on its default control grid.
enum SqStatus sq_prepare(size_t atoms, uint32_t method_kind, struct SqPairState **out);

// Optimal control value (`t` or `epsilon`); NaN for states built with
// `sq_pair_state_new`.
enum SqStatus sq_pair_state_control(const struct SqPairState *handle, double *out);

enum SqStatus sq_pair_state_bound(const struct SqPairState *handle, struct SqBound *out);

// Real and imaginary parts of the pair amplitudes. Pass null buffers to
// query the length.
enum SqStatus sq_pair_state_alphas(const struct SqPairState *handle,
                                   double *re,
                                   double *im,
                                   size_t capacity,
                                   size_t *written);

void sq_pair_state_free(struct SqPairState *handle);

// `<(N1 - N0)^2>` and `<(N-1 - N0)^2>` after the full interferometer.
enum SqStatus sq_signal(const struct SqPairState *handle,
                        double p,
                        double q,
                        double t,
                        double *sq_p0,
                        double *sq_m0);

// Samples both signals from `t = 0` and recovers `p` and `q` from their
// spectra. A `step <= 0` selects the default `pi / (8 |p|)`.
enum SqStatus sq_estimate(const struct SqPairState *handle,
                          double p,
                          double q,
                          double step,
                          size_t samples,
                          bool hann,
                          struct SqEstimate *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPINOR_QCRB_H */
