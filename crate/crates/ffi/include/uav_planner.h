#ifndef UAV_PLANNER_H
#define UAV_PLANNER_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every exported function.
 */
typedef enum UavStatus {
  UAV_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  UAV_STATUS_NULL_POINTER = 1,
  /**
   * Bad configuration, argument or string encoding.
   */
  UAV_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The mission cannot be planned (unreachable endpoints, margin cap).
   */
  UAV_STATUS_INFEASIBLE = 3,
  UAV_STATUS_SOLVER = 4,
  UAV_STATUS_IO = 5,
  /**
   * An output buffer has the wrong length.
   */
  UAV_STATUS_BUFFER_SIZE = 6,
  /**
   * A Rust panic was caught; the library state is unaffected.
   */
  UAV_STATUS_PANIC = 7,
} UavStatus;

/**
 * Result of one planning run.
 */
typedef struct UavPlan UavPlan;

/**
 * Run configuration handle.
 */
typedef struct UavPlanner UavPlanner;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *uav_last_error_message(void);

/**
 * Planner with the built-in reference configuration.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum UavStatus uav_planner_default(struct UavPlanner **out);

/**
 * Planner from a JSON configuration document.
 *
 * # Safety
 * `json` must be a nul-terminated string and `out` valid for one write.
 */
enum UavStatus uav_planner_from_json(const char *json, struct UavPlanner **out);

/**
 * Planner from a JSON configuration file.
 *
 * # Safety
 * `path` must be a nul-terminated string and `out` valid for one write.
 */
enum UavStatus uav_planner_from_file(const char *path, struct UavPlanner **out);

/**
 * Switches to the reduced CI problem size.
 *
 * # Safety
 * `planner` must be null or a live planner handle.
 */
enum UavStatus uav_planner_apply_ci_profile(struct UavPlanner *planner);

/**
 * Sets the Monte Carlo seed.
 *
 * # Safety
 * `planner` must be null or a live planner handle.
 */
enum UavStatus uav_planner_set_seed(struct UavPlanner *planner, uint64_t seed);

/**
 * # Safety
 * `planner` must be null or a handle from this library not yet freed.
 */
void uav_planner_free(struct UavPlanner *planner);

/**
 * Plans with `scheme` (`proposed`, `ac`, `fixed-slot`, `fixed-alt`,
 * `fixed-traj`), or with the configured scheme when `scheme` is null.
 *
 * # Safety
 * `planner` must be a live handle, `scheme` null or nul-terminated, and
 * `out` valid for one write.
 */
enum UavStatus uav_planner_solve(const struct UavPlanner *planner,
                                 const char *scheme,
                                 struct UavPlan **out);

/**
 * # Safety
 * `plan` must be null or a handle from this library not yet freed.
 */
void uav_plan_free(struct UavPlan *plan);

/**
 * Mission completion time (s).
 *
 * # Safety
 * `plan` must be a live handle and `out` valid for one write.
 */
enum UavStatus uav_plan_completion_time(const struct UavPlan *plan, double *out);

/**
 * 1 when the run converged without residual slack and passed Monte Carlo
 * validation, else 0.
 *
 * # Safety
 * `plan` must be a live handle and `out` valid for one write.
 */
enum UavStatus uav_plan_is_feasible(const struct UavPlan *plan, int32_t *out);

/**
 * Number of slots `N`.
 *
 * # Safety
 * `plan` must be a live handle and `out` valid for one write.
 */
enum UavStatus uav_plan_num_slots(const struct UavPlan *plan, size_t *out);

/**
 * Number of ground nodes `K`.
 *
 * # Safety
 * `plan` must be a live handle and `out` valid for one write.
 */
enum UavStatus uav_plan_num_gns(const struct UavPlan *plan, size_t *out);

/**
 * Copies the `N + 1` waypoints as `x, y, z` triples; `len` must be `3 (N + 1)`.
 *
 * # Safety
 * `plan` must be a live handle and `xyz` valid for `len` writes.
 */
enum UavStatus uav_plan_waypoints(const struct UavPlan *plan, double *xyz, size_t len);

/**
 * Copies the `N` slot lengths (s).
 *
 * # Safety
 * `plan` must be a live handle and `out` valid for `len` writes.
 */
enum UavStatus uav_plan_slot_lengths(const struct UavPlan *plan, double *out, size_t len);

/**
 * Copies the GN served in each of the `N` slots, or -1 for idle slots.
 *
 * # Safety
 * `plan` must be a live handle and `out` valid for `len` writes.
 */
enum UavStatus uav_plan_assignment(const struct UavPlan *plan, int64_t *out, size_t len);

/**
 * Copies the per-GN Monte Carlo mean rates and their standard errors
 * (bps/Hz); both buffers hold `K` values.
 *
 * # Safety
 * `plan` must be a live handle and both buffers valid for `len` writes.
 */
enum UavStatus uav_plan_mc_rates(const struct UavPlan *plan,
                                 double *mean,
                                 double *stderr,
                                 size_t len);

/**
 * Writes the result files of `plan` into `dir`.
 *
 * # Safety
 * `planner` and `plan` must be live handles and `dir` nul-terminated.
 */
enum UavStatus uav_plan_write_results(const struct UavPlanner *planner,
                                      const struct UavPlan *plan,
                                      const char *dir);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* UAV_PLANNER_H */
