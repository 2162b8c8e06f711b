#ifndef STABLE_EULER_H
#define STABLE_EULER_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Error-bound regime for [`se_theoretical_exponent`].
 */
typedef enum SeRegime {
  SE_REGIME_BOUNDED = 0,
  SE_REGIME_DIST_I = 1,
  SE_REGIME_DIST_II = 2,
} SeRegime;

/**
 * Result of every fallible call.
 */
typedef enum SeStatus {
  SE_STATUS_OK = 0,
  SE_STATUS_NULL_POINTER = 1,
  SE_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The spectral measure annihilates some direction.
   */
  SE_STATUS_DEGENERATE = 3,
  /**
   * The output buffer is shorter than required; nothing was written.
   */
  SE_STATUS_BUFFER_TOO_SMALL = 4,
  /**
   * A simulated path left the finite range.
   */
  SE_STATUS_SIMULATION_FAILED = 5,
  SE_STATUS_IO = 6,
  /**
   * A quadrature or truncation tolerance was not met.
   */
  SE_STATUS_NUMERICAL = 7,
  /**
   * A panic was caught at the boundary.
   */
  SE_STATUS_INTERNAL = 8,
} SeStatus;

/**
 * Verdict of an experiment, as reported by [`se_report_verdict`].
 */
typedef enum SeVerdict {
  SE_VERDICT_CONSISTENT = 0,
  SE_VERDICT_INCONSISTENT = 1,
  SE_VERDICT_INCONCLUSIVE = 2,
} SeVerdict;

/**
 * Drift field: closed-form or lacunary (optionally mollified).
 */
typedef struct SeDrift SeDrift;

/**
 * Completed experiment.
 */
typedef struct SeReport SeReport;

/**
 * Increment sampler for a stable spec.
 */
typedef struct SeSampler SeSampler;

/**
 * Stability index plus spectral measure.
 */
typedef struct SeStableSpec SeStableSpec;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Writes the last error message of this thread as a NUL-terminated string
 * into `buf` (truncated to `len − 1` bytes) and returns the full message
 * length in bytes, excluding the terminator.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t se_last_error_message(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *se_version(void);

/**
 * Spec with the rotation-invariant measure of total mass `mass` on
 * `S^{dim−1}`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for a handle.
 */
enum SeStatus se_spec_new_uniform(double alpha, size_t dim, double mass, struct SeStableSpec **out);

/**
 * Spec with `count` atoms; `dirs` holds `count × dim` unit vectors row by
 * row and `weights` their masses. The atom set must be symmetric.
 *
 * # Safety
 * `dirs` must point to `count·dim` values, `weights` to `count` values and
 * `out` to writable storage for a handle.
 */
enum SeStatus se_spec_new_atoms(double alpha,
                                size_t dim,
                                const double *dirs,
                                const double *weights,
                                size_t count,
                                struct SeStableSpec **out);

/**
 * # Safety
 * `spec` must be null or a handle from `se_spec_new_*` not yet freed.
 */
void se_spec_free(struct SeStableSpec *spec);

/**
 * Dimension of the spec, or 0 for a null handle.
 *
 * # Safety
 * `spec` must be null or a live handle.
 */
size_t se_spec_dim(const struct SeStableSpec *spec);

/**
 * Characteristic exponent `ψ(ξ)`.
 *
 * # Safety
 * `xi` must point to `dim` values and `out` to a writable `double`.
 */
enum SeStatus se_spec_characteristic_exponent(const struct SeStableSpec *spec,
                                              const double *xi,
                                              size_t dim,
                                              double *out);

/**
 * Sampler for the increments of the process with the given spec.
 *
 * # Safety
 * `spec` must be a live handle and `out` writable storage for a handle.
 */
enum SeStatus se_sampler_new(const struct SeStableSpec *spec, struct SeSampler **out);

/**
 * # Safety
 * `sampler` must be null or a handle from [`se_sampler_new`] not yet freed.
 */
void se_sampler_free(struct SeSampler *sampler);

/**
 * `n` independent increments `L_{t+dt} − L_t` as a row-major `n × d` array.
 * `needed` (may be null) receives `n·d`.
 *
 * # Safety
 * `out` must point to `capacity` writable values.
 */
enum SeStatus se_sampler_sample(const struct SeSampler *sampler,
                                double dt,
                                size_t n,
                                uint64_t seed,
                                double *out,
                                size_t capacity,
                                size_t *needed);

/**
 * `b_i(x) = amplitude · sin(x_i)`.
 *
 * # Safety
 * `out` must be writable storage for a handle.
 */
enum SeStatus se_drift_new_sine(size_t dim, double amplitude, struct SeDrift **out);

/**
 * Lacunary drift in `B^{−β}_{∞,∞}` with levels `0..=levels`.
 *
 * # Safety
 * `out` must be writable storage for a handle.
 */
enum SeStatus se_drift_new_lacunary(double beta,
                                    int32_t levels,
                                    double amplitude,
                                    uint64_t seed,
                                    size_t dim,
                                    bool divergence_free,
                                    struct SeDrift **out);

/**
 * Mollification `b_m = b ∗ ρ_m` of a lacunary drift.
 *
 * # Safety
 * `drift` must be a live handle and `out` writable storage for a handle.
 */
enum SeStatus se_drift_mollify(const struct SeDrift *drift, double m, struct SeDrift **out);

/**
 * # Safety
 * `drift` must be null or a handle from `se_drift_*` not yet freed.
 */
void se_drift_free(struct SeDrift *drift);

/**
 * `b(x)` into `out[0..dim]`.
 *
 * # Safety
 * `x` and `out` must each point to `dim` values.
 */
enum SeStatus se_drift_eval(const struct SeDrift *drift, const double *x, double *out, size_t dim);

/**
 * `‖b‖_{B^s_{∞,∞}}` of a lacunary drift.
 *
 * # Safety
 * `out` must point to a writable `double`.
 */
enum SeStatus se_drift_besov_norm(const struct SeDrift *drift, double s, double *out);

/**
 * Endpoints at time `horizon` of `paths` scheme paths with `n` steps per
 * unit time, as a row-major `paths × d` array. `x0` may be null for the
 * origin.
 *
 * # Safety
 * `x0` must be null or point to `d` values; `out` must point to `capacity`
 * writable values.
 */
enum SeStatus se_simulate(const struct SeSampler *sampler,
                          const struct SeDrift *drift,
                          uint64_t n,
                          double horizon,
                          const double *x0,
                          size_t paths,
                          uint64_t seed,
                          double *out,
                          size_t capacity,
                          size_t *needed);

/**
 * Predicted exponent of `n` in the weak-error bound.
 *
 * # Safety
 * `out` must point to a writable `double`.
 */
enum SeStatus se_theoretical_exponent(double alpha,
                                      double beta,
                                      double gamma,
                                      double theta,
                                      double eps,
                                      enum SeRegime regime,
                                      double *out);

/**
 * Validates and runs the experiment described by the JSON `config`.
 *
 * # Safety
 * `config` must be a NUL-terminated string and `out` writable storage for a
 * handle.
 */
enum SeStatus se_experiment_run(const char *config, struct SeReport **out);

/**
 * # Safety
 * `report` must be null or a handle from [`se_experiment_run`] not yet freed.
 */
void se_report_free(struct SeReport *report);

/**
 * # Safety
 * `report` must be a live handle and `out` a writable verdict.
 */
enum SeStatus se_report_verdict(const struct SeReport *report, enum SeVerdict *out);

/**
 * Fitted slope; writes NaN when fewer than four points cleared the noise
 * floor or the experiment fits no rate.
 *
 * # Safety
 * `report` must be a live handle and `out` a writable `double`.
 */
enum SeStatus se_report_slope(const struct SeReport *report, double *out);

/**
 * The report as NUL-terminated JSON. `needed` (may be null) receives the
 * byte count including the terminator.
 *
 * # Safety
 * `buf` must point to `capacity` writable bytes.
 */
enum SeStatus se_report_json(const struct SeReport *report,
                             char *buf,
                             size_t capacity,
                             size_t *needed);

/**
 * Writes `report.json`, `errors.csv`, `meta.json`, `log.txt` and any saved
 * populations into the directory `dir`.
 *
 * # Safety
 * `dir` must be a NUL-terminated string.
 */
enum SeStatus se_report_write(const struct SeReport *report, const char *dir);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* STABLE_EULER_H */
