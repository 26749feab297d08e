#ifndef ROMCOVER_H
#define ROMCOVER_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RcStatus {
  RC_STATUS_OK = 0,
  RC_STATUS_NULL_POINTER = 1,
  RC_STATUS_INVALID_ARGUMENT = 2,
  RC_STATUS_TOO_LARGE = 3,
  RC_STATUS_DOMAIN = 4,
  RC_STATUS_LOG_DOMAIN_UNSUPPORTED = 5,
  RC_STATUS_EXHAUSTED = 6,
  RC_STATUS_IO = 7,
  RC_STATUS_PARSE = 8,
  RC_STATUS_PANIC = 9,
} RcStatus;

typedef enum RcAlgo {
  RC_ALGO_GREEDY = 0,
  RC_ALGO_ALGORITHM1 = 1,
} RcAlgo;

/*
 Opaque instance handle.
 */
typedef struct RcInstance RcInstance;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread, or NULL. Valid until the
 next call into this library from the same thread.
 */
const char *rc_last_error(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *rc_version(void);

/*
 New linear-size instance with `m` machines and `n` sizes.

 # Safety
 `sizes` must point to `n` doubles (may be NULL when `n == 0`); `out` must
 be writable.
 */
enum RcStatus rc_instance_new(size_t m, const double *sizes, size_t n, struct RcInstance **out);

/*
 New instance whose sizes are natural-log exponents (`-INFINITY` is a zero job).

 # Safety
 As for [`rc_instance_new`].
 */
enum RcStatus rc_instance_new_log(size_t m,
                                  const double *exponents,
                                  size_t n,
                                  struct RcInstance **out);

/*
 Parse an instance from JSON text `{"m": .., "sizes": [..]}`.

 # Safety
 `json` must be a NUL-terminated string; `out` must be writable.
 */
enum RcStatus rc_instance_from_json(const char *json, struct RcInstance **out);

/*
 Release an instance. NULL is ignored.

 # Safety
 `inst` must come from this library and not be used afterwards.
 */
void rc_instance_free(struct RcInstance *inst);

/*
 # Safety
 `inst` must be a live handle or NULL (then 0 is returned).
 */
size_t rc_instance_m(const struct RcInstance *inst);

/*
 # Safety
 `inst` must be a live handle or NULL (then 0 is returned).
 */
size_t rc_instance_n(const struct RcInstance *inst);

/*
 Exact offline optimum by branch and bound. `node_budget == 0` picks the
 library default.

 # Safety
 `inst` must be a live handle; `out` must be writable.
 */
enum RcStatus rc_opt_exact(const struct RcInstance *inst, uint64_t node_budget, double *out);

/*
 Average load, an upper bound on the optimum.

 # Safety
 `inst` must be a live handle; `out` must be writable.
 */
enum RcStatus rc_opt_upper_bound(const struct RcInstance *inst, double *out);

/*
 Greedy's minimum load in the order `perm` (job indices, length `n`), or
 in listed order when `perm` is NULL.

 # Safety
 `inst` must be a live handle; `perm`, if not NULL, must point to `n`
 entries; `out` must be writable.
 */
enum RcStatus rc_greedy_min_load(const struct RcInstance *inst,
                                 const size_t *perm,
                                 size_t perm_len,
                                 double *out);

/*
 One run of Algorithm 1 seeded with `seed`. The guess is drawn unless
 `has_forced_t` is set, in which case `forced_t` is used.

 # Safety
 As for [`rc_greedy_min_load`].
 */
enum RcStatus rc_algorithm1_min_load(const struct RcInstance *inst,
                                     const size_t *perm,
                                     size_t perm_len,
                                     uint64_t seed,
                                     int32_t forced_t,
                                     bool has_forced_t,
                                     double *out);

/*
 Exact expected minimum load over uniformly random orders (n <= 8).

 # Safety
 `inst` must be a live handle; `out` must be writable.
 */
enum RcStatus rc_exact_rom_value(const struct RcInstance *inst,
                                 enum RcAlgo algo,
                                 int32_t forced_t,
                                 bool has_forced_t,
                                 double *out);

/*
 Monte Carlo mean minimum load over `trials` random orders, with the
 95% half-width.

 # Safety
 `inst` must be a live handle; `mean` and `ci95` must be writable.
 */
enum RcStatus rc_estimate_rom(const struct RcInstance *inst,
                              enum RcAlgo algo,
                              size_t trials,
                              uint64_t seed,
                              double *mean,
                              double *ci95);

/*
 Riemann zeta for real `s > 1`.

 # Safety
 `out` must be writable.
 */
enum RcStatus rc_zeta(double s, double *out);

/*
 Principal branch of the Lambert W function.

 # Safety
 `out` must be writable.
 */
enum RcStatus rc_lambert_w0(double x, double *out);

/*
 Upper bound on the optimal expected points of the talent contest.

 # Safety
 `out` must be writable.
 */
enum RcStatus rc_talent_points_bound(size_t k, uint32_t t, double *out);

/*
 Lower bound on the random-order competitive ratio for `m` machines.

 # Safety
 `out` must be writable.
 */
enum RcStatus rc_ratio_lower_bound(uint64_t m, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ROMCOVER_H */
