/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef PVINVEST_H
#define PVINVEST_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PvStatus {
  PV_STATUS_OK = 0,
  PV_STATUS_NULL_POINTER = 1,
  PV_STATUS_INVALID_PARAMETERS = 2,
  PV_STATUS_INVALID_ARGUMENT = 3,
  PV_STATUS_INVALID_UTF8 = 4,
  PV_STATUS_PARSE = 5,
  PV_STATUS_NUMERICAL = 6,
  PV_STATUS_OUT_OF_RANGE = 7,
  PV_STATUS_PANIC = 8,
} PvStatus;

typedef enum PvVariant {
  PV_VARIANT_FOC_DERIVED = 0,
  PV_VARIANT_AS_PUBLISHED = 1,
} PvVariant;

/**
 * Model and storage parameters.
 */
typedef struct PvModel PvModel;

/**
 * Simulated path.
 */
typedef struct PvTrajectory PvTrajectory;

/**
 * Closed-form optimum. `s_star` is NaN for PV-only solutions.
 */
typedef struct PvSolution {
  double i_star;
  double psi;
  double e_star;
  double d_star;
  double s_star;
  bool has_storage;
  bool clamped;
} PvSolution;

typedef struct PvSimulation {
  double dt;
  double t_end;
  double e0;
  double d0;
  double s0;
} PvSimulation;

typedef struct PvSample {
  double t;
  double i;
  double e;
  double d;
  double s;
} PvSample;

typedef struct PvCalibration {
  double psi;
  double psi_base;
  double psi_tax;
  double residual;
} PvCalibration;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failure on this thread, or an empty string.
 * The pointer stays valid until the next call into this library on the
 * same thread.
 */
const char *pv_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *pv_version(void);

/**
 * New model with the calibrated default parameters. Release with [`pv_model_free`].
 */
struct PvModel *pv_model_new_default(void);

/**
 * New model from a JSON run configuration (only the `model` and `storage`
 * sections matter; other sections are still validated).
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum PvStatus pv_model_from_json(const char *json, struct PvModel **out);

/**
 * # Safety
 * `model` must come from this library and not be used afterwards. Null is ignored.
 */
void pv_model_free(struct PvModel *model);

/**
 * Sets one parameter by name (`r`, `c`, `eta`, ..., `c_s`, `eta_s`, `q`,
 * `sigma`). The change is rejected and the model left untouched when the
 * result is invalid.
 *
 * # Safety
 * `model` must be a live handle and `name` a NUL-terminated string.
 */
enum PvStatus pv_model_set_param(struct PvModel *model, const char *name, double value);

/**
 * # Safety
 * `model` must be a live handle, `name` a NUL-terminated string and `out` valid.
 */
enum PvStatus pv_model_get_param(const struct PvModel *model, const char *name, double *out);

/**
 * PV-only optimum.
 *
 * # Safety
 * `model` must be a live handle and `out` valid.
 */
enum PvStatus pv_solve_base(const struct PvModel *model, struct PvSolution *out);

/**
 * Optimum with storage under the chosen formula.
 *
 * # Safety
 * `model` must be a live handle and `out` valid.
 */
enum PvStatus pv_solve_storage(const struct PvModel *model,
                               enum PvVariant variant,
                               struct PvSolution *out);

/**
 * Simulates the optimal constant investment. Release the result with
 * [`pv_trajectory_free`].
 *
 * # Safety
 * `model` must be a live handle and `out` valid.
 */
enum PvStatus pv_simulate(const struct PvModel *model,
                          bool with_storage,
                          enum PvVariant variant,
                          struct PvSimulation sim,
                          struct PvTrajectory **out);

/**
 * Number of samples, or 0 for a null handle.
 *
 * # Safety
 * `traj` must be null or a live handle.
 */
size_t pv_trajectory_len(const struct PvTrajectory *traj);

/**
 * # Safety
 * `traj` must be a live handle and `out` valid.
 */
enum PvStatus pv_trajectory_get(const struct PvTrajectory *traj,
                                size_t index,
                                struct PvSample *out);

/**
 * Discounted welfare of the simulated path.
 *
 * # Safety
 * `traj` must be a live handle and `out` valid.
 */
enum PvStatus pv_trajectory_objective(const struct PvTrajectory *traj, double *out);

/**
 * # Safety
 * `traj` must come from this library and not be used afterwards. Null is ignored.
 */
void pv_trajectory_free(struct PvTrajectory *traj);

/**
 * Recovers the composite shadow term from two reported optima that differ
 * only in `(r, c)`.
 *
 * # Safety
 * `out` must be valid.
 */
enum PvStatus pv_calibrate(double reported_base,
                           double reported_tax,
                           double base_r,
                           double base_c,
                           double tax_r,
                           double tax_c,
                           double eta,
                           struct PvCalibration *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PVINVEST_H */
