#ifndef INTRINSIC_ARROW_H
#define INTRINSIC_ARROW_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Arms of a Langevin experiment.
 */
#define IA_ARM_FORWARD 0

#define IA_ARM_REVERSE 1

/**
 * Per-path fields of a Langevin experiment.
 */
#define IA_FIELD_DELTA_I 0

#define IA_FIELD_D 1

#define IA_FIELD_XI 2

#define IA_FIELD_ETA 3

/**
 * Result codes.
 */
typedef enum IaStatus {
  IA_STATUS_OK = 0,
  IA_STATUS_NULL_POINTER = 1,
  IA_STATUS_INVALID_ARGUMENT = 2,
  IA_STATUS_NON_FINITE = 3,
  IA_STATUS_UNDETERMINED_ARROW = 4,
  IA_STATUS_DEGENERATE_SUPPORT = 5,
  IA_STATUS_INVALID_DISTRIBUTION = 6,
  IA_STATUS_INFEASIBLE_ENUMERATION = 7,
  IA_STATUS_BUFFER_TOO_SMALL = 8,
  IA_STATUS_PANIC = 9,
} IaStatus;

/**
 * Opaque Langevin experiment handle.
 */
typedef struct IaLangevinExperiment IaLangevinExperiment;

/**
 * Opaque typical-projector handle.
 */
typedef struct IaTypicalProjector IaTypicalProjector;

/**
 * Sample mean with its standard error.
 */
typedef struct IaEstimate {
  double mean;
  double std_error;
  size_t count;
} IaEstimate;

/**
 * Langevin model and time grid.
 */
typedef struct IaLangevinSetup {
  double lambda;
  double gamma;
  double dt;
  double t1;
  double t2;
} IaLangevinSetup;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a NUL-terminated static string.
 */
const char *ia_version(void);

/**
 * Copy the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length plus one, so a
 * return value larger than `len` signals truncation. `buf` may be null when
 * `len` is 0.
 *
 * # Safety
 * `buf` must be valid for `len` bytes of writes.
 */
size_t ia_last_error_message(char *buf, size_t len);

/**
 * Static description of a status code; "unknown" for other values.
 */
const char *ia_status_name(int status);

/**
 * `P(s | x) = 1 / (1 + exp(-s x))`, `s` = +1 or -1.
 *
 * # Safety
 * `out` must be a valid pointer to a double.
 */
enum IaStatus ia_arrow_probability(double x, int s, double *out);

/**
 * `D = ln p_forward - ln p_reversed`.
 *
 * # Safety
 * `out` must be a valid pointer to a double.
 */
enum IaStatus ia_log_ratio(double p_forward, double p_reversed, double *out);

/**
 * Posterior of arrow `s` given the two likelihoods.
 *
 * # Safety
 * `out` must be a valid pointer to a double.
 */
enum IaStatus ia_bayes_posterior(double p_forward, double p_reversed, int s, double *out);

/**
 * Mean posterior of the `+` arrow over `n` decision statistics.
 *
 * # Safety
 * `d` must point to `n` doubles; `out` must be valid.
 */
enum IaStatus ia_mean_fidelity(const double *d, size_t n, struct IaEstimate *out);

/**
 * `ΔI = n [H(ρ2) - H(ρ1)]` for two distributions of length `d`.
 *
 * # Safety
 * `rho1` and `rho2` must point to `d` doubles; `out` must be valid.
 */
enum IaStatus ia_shannon_information_change(const double *rho1,
                                            const double *rho2,
                                            size_t d,
                                            uint64_t n,
                                            double *out);

/**
 * Closed-form mean of the joint decision statistic.
 *
 * # Safety
 * `rho1` and `rho2` must point to `d` doubles; `out` must be valid.
 */
enum IaStatus ia_mean_d_joint(const double *rho1,
                              const double *rho2,
                              size_t d,
                              uint64_t n,
                              double *out);

/**
 * `F = 1 / (1 + exp(-ΔI))` for `ΔI >= 0`.
 *
 * # Safety
 * `out` must be a valid pointer to a double.
 */
enum IaStatus ia_fidelity_closed_form(double delta_i, double *out);

/**
 * Build the `delta`-typical projector of `ρ^{⊗n}` from the `d` eigenvalues
 * of `ρ`. Release with [`ia_typical_projector_free`].
 *
 * # Safety
 * `eigenvalues` must point to `d` doubles; `out` must be valid.
 */
enum IaStatus ia_typical_projector_new(const double *eigenvalues,
                                       size_t d,
                                       uint32_t n,
                                       double delta,
                                       struct IaTypicalProjector **out);

/**
 * `Tr(E1 ρ^{⊗n})` and `Tr(E1 (1/d)^{⊗n})`.
 *
 * # Safety
 * `handle` must come from [`ia_typical_projector_new`]; outputs must be valid.
 */
enum IaStatus ia_typical_projector_traces(const struct IaTypicalProjector *handle,
                                          double *tr_xi,
                                          double *tr_eta);

/**
 * `ln rank(E1)`; `-inf` for the zero projector.
 *
 * # Safety
 * `handle` must come from [`ia_typical_projector_new`]; `out` must be valid.
 */
enum IaStatus ia_typical_projector_log_rank(const struct IaTypicalProjector *handle, double *out);

/**
 * Number of type classes spanning `E1`.
 *
 * # Safety
 * `handle` must come from [`ia_typical_projector_new`]; `out` must be valid.
 */
enum IaStatus ia_typical_projector_class_count(const struct IaTypicalProjector *handle,
                                               size_t *out);

/**
 * # Safety
 * `handle` must come from [`ia_typical_projector_new`] and not be used
 * afterwards. Null is ignored.
 */
void ia_typical_projector_free(struct IaTypicalProjector *handle);

/**
 * Forward/reverse experiment with `n_paths` per arm. The protocol is given
 * as `n_knots` `(t, value)` knots, linearly interpolated; a repeated time
 * is a jump. Release with [`ia_langevin_experiment_free`].
 *
 * # Safety
 * `setup` and `out` must be valid; `knot_t` and `knot_value` must point to
 * `n_knots` doubles each.
 */
enum IaStatus ia_langevin_experiment_run(const struct IaLangevinSetup *setup,
                                         const double *knot_t,
                                         const double *knot_value,
                                         size_t n_knots,
                                         size_t n_paths,
                                         uint64_t seed,
                                         struct IaLangevinExperiment **out);

/**
 * Paths per arm.
 *
 * # Safety
 * `handle` must come from [`ia_langevin_experiment_run`]; `out` must be valid.
 */
enum IaStatus ia_langevin_experiment_len(const struct IaLangevinExperiment *handle, size_t *out);

/**
 * Copy one per-path field (`IA_FIELD_*`) of one arm (`IA_ARM_*`) into
 * `buf`, which must hold at least the arm length.
 *
 * # Safety
 * `handle` must come from [`ia_langevin_experiment_run`]; `buf` must be
 * valid for `len` doubles.
 */
enum IaStatus ia_langevin_experiment_copy(const struct IaLangevinExperiment *handle,
                                          int arm,
                                          int field,
                                          double *buf,
                                          size_t len);

/**
 * `<e^{-D}>` over the forward arm.
 *
 * # Safety
 * `handle` must come from [`ia_langevin_experiment_run`]; `out` must be valid.
 */
enum IaStatus ia_langevin_experiment_integral_relation(const struct IaLangevinExperiment *handle,
                                                       struct IaEstimate *out);

/**
 * # Safety
 * `handle` must come from [`ia_langevin_experiment_run`] and not be used
 * afterwards. Null is ignored.
 */
void ia_langevin_experiment_free(struct IaLangevinExperiment *handle);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* INTRINSIC_ARROW_H */
