#ifndef ONEBIT_H
#define ONEBIT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum OnebitStatus {
  ONEBIT_STATUS_OK = 0,
  ONEBIT_STATUS_INVALID_PARAMETER = 1,
  ONEBIT_STATUS_DOMAIN = 2,
  ONEBIT_STATUS_UNSUPPORTED = 3,
  ONEBIT_STATUS_NON_CONVERGENCE = 4,
  ONEBIT_STATUS_FACTORIZATION = 5,
  ONEBIT_STATUS_NULL_POINTER = 6,
  ONEBIT_STATUS_BUFFER_TOO_SMALL = 7,
  ONEBIT_STATUS_INTERNAL = 8,
} OnebitStatus;

typedef enum OnebitCoherentMethod {
  ONEBIT_COHERENT_METHOD_EXACT = 0,
  ONEBIT_COHERENT_METHOD_SPHERICAL = 1,
  ONEBIT_COHERENT_METHOD_LOW_SNR = 2,
  ONEBIT_COHERENT_METHOD_HIGH_SNR = 3,
  ONEBIT_COHERENT_METHOD_LARGE_NT = 4,
} OnebitCoherentMethod;

typedef enum OnebitNoncoherentMethod {
  ONEBIT_NONCOHERENT_METHOD_EXACT = 0,
  ONEBIT_NONCOHERENT_METHOD_LB_UNIFORM = 1,
  ONEBIT_NONCOHERENT_METHOD_LB_INDEP = 2,
  ONEBIT_NONCOHERENT_METHOD_LB_INDEP_EXACT = 3,
  ONEBIT_NONCOHERENT_METHOD_UB_GENIE = 4,
  ONEBIT_NONCOHERENT_METHOD_LOW_SNR = 5,
  ONEBIT_NONCOHERENT_METHOD_LARGE_T_LB = 6,
  ONEBIT_NONCOHERENT_METHOD_LARGE_T_UB = 7,
} OnebitNoncoherentMethod;

typedef enum OnebitPrior {
  ONEBIT_PRIOR_JEFFREYS = 0,
  ONEBIT_PRIOR_UNIFORM = 1,
} OnebitPrior;

typedef struct OnebitPmf OnebitPmf;

typedef struct OnebitQSampler OnebitQSampler;

typedef struct OnebitRadialSampler OnebitRadialSampler;

// A capacity value in bits per channel use.
//
// `std_err` is NaN for deterministic methods. The three terms are NaN when
// `has_terms` is 0; otherwise they sum to `bits`.
typedef struct OnebitCapacity {
  double bits;
  double std_err;
  uint8_t has_terms;
  double term_dimension;
  double term_volume;
  double term_alpha;
} OnebitCapacity;

// A Monte Carlo estimate and its standard error.
typedef struct OnebitEstimate {
  double value;
  double std_err;
} OnebitEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *onebit_version(void);

// Message of the last failed call on this thread, or an empty string.
//
// The pointer stays valid until the next call into the library on the same
// thread.
const char *onebit_last_error(void);

// `ζ_k(t) = E[S^k ξ(tS)]` for `k ∈ {0, 2}` and `t ≥ 0`.
//
// # Safety
// `out` must be null or valid for writes.
enum OnebitStatus onebit_zeta(uint32_t k, double t, double *out);

// Coherent Fisher-information integral `α(snr, n_t)`.
//
// # Safety
// `out` must be null or valid for writes.
enum OnebitStatus onebit_alpha_coherent(double snr, uint32_t nt, double *out);

// Coherent capacity at `n_r` receive antennas.
//
// # Safety
// `out` must be null or valid for writes.
enum OnebitStatus onebit_capacity_coherent(double snr,
                                           uint32_t nt,
                                           uint64_t nr,
                                           enum OnebitCoherentMethod method,
                                           struct OnebitCapacity *out);

// Non-coherent capacity, bound or approximation at coherence length `t`.
//
// `samples` and `seed` are used by `ONEBIT_NONCOHERENT_METHOD_EXACT` when
// `t = 3`; other methods ignore them.
//
// # Safety
// `out` must be null or valid for writes.
enum OnebitStatus onebit_capacity_noncoherent(double snr,
                                              uint32_t t,
                                              uint32_t nt,
                                              uint64_t nr,
                                              enum OnebitNoncoherentMethod method,
                                              uint64_t samples,
                                              uint64_t seed,
                                              struct OnebitCapacity *out);

// Closed-form `α` for `T = 2`.
//
// # Safety
// `out` must be null or valid for writes.
enum OnebitStatus onebit_alpha_t2(double gamma, double *out);

// Monte Carlo `α` for `T = 3`.
//
// # Safety
// `out` must be null or valid for writes.
enum OnebitStatus onebit_alpha_t3(double gamma,
                                  uint64_t samples,
                                  uint64_t seed,
                                  struct OnebitEstimate *out);

// Exact volume of `Q_γ` for `t ∈ {2, 3, 4}`.
//
// # Safety
// `out` must be null or valid for writes.
enum OnebitStatus onebit_vol_q_exact(uint32_t t, double gamma, double *out);

// Monte Carlo volume of `Q_γ`.
//
// # Safety
// `out` must be null or valid for writes.
enum OnebitStatus onebit_vol_q_mc(uint32_t t,
                                  double gamma,
                                  uint64_t samples,
                                  uint64_t seed,
                                  struct OnebitEstimate *out);

// Exact mutual information of one `T = 2` block, in bits per block.
//
// # Safety
// `out` must be null or valid for writes.
enum OnebitStatus onebit_mi_exact_t2(uint64_t nr,
                                     double gamma,
                                     enum OnebitPrior prior,
                                     double *out);

// Sign-pattern distribution of `sign(z)`, `z ~ N(0, Σ(q))`, for `t ≤ 3`.
//
// `q` holds the `t(t−1)/2` correlations in row-major upper-triangle order.
//
// # Safety
// `q` must point to `len` readable doubles; `out` must be valid for writes.
enum OnebitStatus onebit_pmf_exact(uint32_t t, const double *q, size_t len, struct OnebitPmf **out);

// Monte Carlo sign-pattern distribution for any `t`.
//
// # Safety
// As for [`onebit_pmf_exact`].
enum OnebitStatus onebit_pmf_mc(uint32_t t,
                                const double *q,
                                size_t len,
                                uint64_t samples,
                                uint64_t seed,
                                struct OnebitPmf **out);

// Number of patterns, `2^t`.
//
// # Safety
// `pmf` must be null or a live handle.
enum OnebitStatus onebit_pmf_len(const struct OnebitPmf *pmf, size_t *out);

// Probability of pattern `index`; bit `k` of `index` set means `y_k = −1`.
//
// # Safety
// `pmf` must be null or a live handle.
enum OnebitStatus onebit_pmf_get(const struct OnebitPmf *pmf, size_t index, double *out);

// Copies the whole distribution into `buf`, which must hold `2^t` doubles.
//
// # Safety
// `pmf` must be null or a live handle; `buf` must be valid for `len` writes.
enum OnebitStatus onebit_pmf_copy(const struct OnebitPmf *pmf, double *buf, size_t len);

// # Safety
// `pmf` must be null or a handle not yet freed.
void onebit_pmf_free(struct OnebitPmf *pmf);

// Uniform sampler on `Q_γ`. Draws depend only on `seed` and the call order.
//
// # Safety
// `out` must be valid for writes.
enum OnebitStatus onebit_q_sampler_new(uint32_t t,
                                       double gamma,
                                       uint64_t seed,
                                       struct OnebitQSampler **out);

// Writes the next draw, `t(t−1)/2` doubles, into `buf`.
//
// # Safety
// `sampler` must be null or a live handle; `buf` must be valid for `len` writes.
enum OnebitStatus onebit_q_sampler_next(struct OnebitQSampler *sampler, double *buf, size_t len);

// # Safety
// `sampler` must be null or a handle not yet freed.
void onebit_q_sampler_free(struct OnebitQSampler *sampler);

// Sampler for the capacity-achieving coherent input law at `(snr, n_t)`.
//
// # Safety
// `out` must be valid for writes.
enum OnebitStatus onebit_radial_sampler_new(double snr,
                                            uint32_t nt,
                                            uint64_t seed,
                                            struct OnebitRadialSampler **out);

// Writes the next input vector, `n_t` doubles, into `buf`.
//
// # Safety
// `sampler` must be null or a live handle; `buf` must be valid for `len` writes.
enum OnebitStatus onebit_radial_sampler_next(struct OnebitRadialSampler *sampler,
                                             double *buf,
                                             size_t len);

// # Safety
// `sampler` must be null or a handle not yet freed.
void onebit_radial_sampler_free(struct OnebitRadialSampler *sampler);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ONEBIT_H */
