#ifndef FRACPK_H
#define FRACPK_H

/* Generated by cbindgen from crates/ffi; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FpkStatus {
  FPK_STATUS_OK = 0,
  FPK_STATUS_NULL_POINTER = 1,
  FPK_STATUS_INVALID_ARGUMENT = 2,
  FPK_STATUS_DOMAIN = 3,
  FPK_STATUS_DIMENSION = 4,
  FPK_STATUS_CONVERGENCE = 5,
  FPK_STATUS_ACCURACY = 6,
  FPK_STATUS_VALIDATION = 7,
  FPK_STATUS_BUFFER_TOO_SMALL = 8,
  FPK_STATUS_PANIC = 9,
} FpkStatus;

typedef enum FpkSex {
  FPK_SEX_MALE = 0,
  FPK_SEX_FEMALE = 1,
} FpkSex;

// Piecewise-constant scalar input.
typedef struct FpkSchedule FpkSchedule;

// Linear fractional system `D y = A y + B u`.
typedef struct FpkSystem FpkSystem;

// States sampled on a time grid.
typedef struct FpkTrajectory FpkTrajectory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *fpk_version(void);

// Copies the calling thread's last error message into `buf` (NUL-terminated,
// truncated to `cap`). Returns the full message length without the NUL, or 0
// when there is no error recorded.
//
// # Safety
// `buf` must be null or valid for `cap` bytes.
size_t fpk_last_error(char *buf, size_t cap);

void fpk_clear_error(void);

// E_{α,α′}(z) with the default truncation policy.
//
// # Safety
// `out` must be valid for one write.
enum FpkStatus fpk_mittag_leffler(double alpha, double alpha_prime, double z, double *out);

// BIS value for an effect-site concentration.
//
// # Safety
// `out` must be valid for one write.
enum FpkStatus fpk_bis(double y4, double bis0, double ec50, double gamma, double *out);

// System from an explicit row-major `n`×`n` matrix, input column `b` and
// initial state `y0` (both of length `n`). `psi_spec` uses the forms
// "identity", "shift:c", "power:p", "sqrt"; null means identity.
//
// # Safety
// Array arguments must be valid for the stated lengths; `psi_spec` must be
// null or NUL-terminated; `out` must be valid for one write.
enum FpkStatus fpk_system_new(const double *a,
                              size_t n,
                              const double *b,
                              const double *y0,
                              double alpha,
                              const char *psi_spec,
                              double start,
                              struct FpkSystem **out);

// Four-compartment propofol system for a patient, starting empty at t = 0.
//
// # Safety
// `psi_spec` must be null or NUL-terminated; `out` must be valid for one write.
enum FpkStatus fpk_system_schnider(double age,
                                   double weight,
                                   double height,
                                   enum FpkSex sex,
                                   double alpha,
                                   const char *psi_spec,
                                   struct FpkSystem **out);

// Dimension of the state, or 0 for a null handle.
//
// # Safety
// `sys` must be null or a live handle.
size_t fpk_system_dim(const struct FpkSystem *sys);

// # Safety
// `sys` must be null or a handle not yet freed.
void fpk_system_free(struct FpkSystem *sys);

// Schedule with `n_breakpoints` increasing times and `n_breakpoints − 1`
// rates; rate k applies on [t_k, t_{k+1}).
//
// # Safety
// `breakpoints` must hold `n_breakpoints` values and `rates` one fewer;
// `out` must be valid for one write.
enum FpkStatus fpk_schedule_new(const double *breakpoints,
                                size_t n_breakpoints,
                                const double *rates,
                                struct FpkSchedule **out);

// # Safety
// `sched` must be null or a handle not yet freed.
void fpk_schedule_free(struct FpkSchedule *sched);

// Closed-form solution on the `n` increasing times of `grid`.
//
// # Safety
// Handles must be live, `grid` valid for `n` values and `out` for one write.
enum FpkStatus fpk_solve_piecewise(const struct FpkSystem *sys,
                                   const struct FpkSchedule *sched,
                                   const double *grid,
                                   size_t n,
                                   struct FpkTrajectory **out);

// Predictor-corrector reference solution with `steps` uniform steps in
// transformed time, over the whole schedule.
//
// # Safety
// Handles must be live and `out` valid for one write.
enum FpkStatus fpk_solve_oracle(const struct FpkSystem *sys,
                                const struct FpkSchedule *sched,
                                size_t steps,
                                struct FpkTrajectory **out);

// Number of time points, or 0 for a null handle.
//
// # Safety
// `traj` must be null or a live handle.
size_t fpk_trajectory_len(const struct FpkTrajectory *traj);

// State dimension, or 0 for a null handle.
//
// # Safety
// `traj` must be null or a live handle.
size_t fpk_trajectory_dim(const struct FpkTrajectory *traj);

// Copies the time grid. `written` (optional) receives the required length.
//
// # Safety
// `traj` must be live; `buf` valid for `cap` values; `written` null or valid.
enum FpkStatus fpk_trajectory_times(const struct FpkTrajectory *traj,
                                    double *buf,
                                    size_t cap,
                                    size_t *written);

// Copies the state at time index `k`.
//
// # Safety
// As for [`fpk_trajectory_times`].
enum FpkStatus fpk_trajectory_state(const struct FpkTrajectory *traj,
                                    size_t k,
                                    double *buf,
                                    size_t cap,
                                    size_t *written);

// Copies component `i` over all time points.
//
// # Safety
// As for [`fpk_trajectory_times`].
enum FpkStatus fpk_trajectory_component(const struct FpkTrajectory *traj,
                                        size_t i,
                                        double *buf,
                                        size_t cap,
                                        size_t *written);

// BIS curve of a four-compartment trajectory (component 4 is the effect site).
//
// # Safety
// As for [`fpk_trajectory_times`].
enum FpkStatus fpk_trajectory_bis(const struct FpkTrajectory *traj,
                                  double bis0,
                                  double ec50,
                                  double gamma,
                                  double *buf,
                                  size_t cap,
                                  size_t *written);

// # Safety
// `traj` must be null or a handle not yet freed.
void fpk_trajectory_free(struct FpkTrajectory *traj);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FRACPK_H */
