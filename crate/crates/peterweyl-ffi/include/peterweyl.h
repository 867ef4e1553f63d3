/* C interface for the peterweyl library.
 *
 * Maintained by hand against crates/peterweyl-ffi/src/lib.rs; check
 * pw_abi_version() against PW_ABI_VERSION before using anything else.
 *
 * Conventions:
 *  - Contexts are opaque handles from pw_context_new_*; release them with
 *    pw_context_free.
 *  - Fallible calls return int32_t: PW_OK on success, a PW_ERR_* code
 *    otherwise. The most recent failure message for the calling thread is
 *    available via pw_last_error (library-owned; do not free).
 *  - Result payloads are UTF-8 JSON strings allocated by the library;
 *    release them with pw_string_free, never with free().
 *  - All entry points catch panics internally and report PW_ERR_PANIC;
 *    nothing unwinds across this boundary.
 */

#ifndef PETERWEYL_H
#define PETERWEYL_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define PW_ABI_VERSION 1u

/* Status codes. */
#define PW_OK 0
#define PW_ERR_RUNTIME 1 /* numerical/IO/serialization failure            */
#define PW_ERR_USAGE 2   /* unknown name, infeasible config, wrong group  */
#define PW_ERR_NULL 3    /* a required pointer argument was null          */
#define PW_ERR_UTF8 4    /* a string argument was not valid UTF-8         */
#define PW_ERR_PANIC 5   /* internal panic caught at the boundary         */
#define PW_ERR_BUFFER 6  /* an output buffer had the wrong length         */

typedef struct PwContext PwContext;

/* ABI version of the linked library. */
uint32_t pw_abi_version(void);

/* Backend contexts. su2 supports everything; the torus backend supports
 * grid queries and transforms only. */
PwContext *pw_context_new_su2(void);
PwContext *pw_context_new_torus(void);
void pw_context_free(PwContext *ctx);

/* Thread-local message for the most recent failure, or NULL. Valid until
 * the next failing call on the same thread. Library-owned. */
const char *pw_last_error(void);

/* Releases a string returned by this library. NULL is tolerated. */
void pw_string_free(char *s);

/* Number of quadrature nodes of the backend's grid at `resolution`. */
int32_t pw_grid_len(const PwContext *ctx, size_t resolution, size_t *out_len);

/* Coordinates of grid node `index`, written into out_coords[0..coords_len].
 * coords_len must equal the backend's coordinate count: 4 for su2 (unit
 * quaternion w,x,y,z), 1 for the torus (angle). */
int32_t pw_grid_node(const PwContext *ctx, size_t resolution, size_t index,
                     double *out_coords, size_t coords_len);

/* Runs a named verification check (e.g. "weyl", "kernel_decay"); on
 * success *out_json holds the full report. Unknown names, infeasible
 * configurations, and torus contexts return PW_ERR_USAGE. */
int32_t pw_run_check(const PwContext *ctx, const char *name, double cutoff,
                     size_t resolution, uint64_t seed, char **out_json);

/* Solves a model operator ("sub_laplacian" or "heat") for a seeded
 * synthetic source; on success *out_json holds the solve report. */
int32_t pw_solve(const PwContext *ctx, const char *operator_name,
                 double cutoff, size_t resolution, uint64_t seed,
                 char **out_json);

/* Forward transform of caller-sampled grid values, truncated at `cutoff`.
 * values_re/values_im hold one entry per grid node in pw_grid_node order
 * (values_im may be NULL for real input; len must equal pw_grid_len). On
 * success *out_json holds one record per representation: label text,
 * dimension, and the coefficient matrix as row-major re/im arrays. */
int32_t pw_forward(const PwContext *ctx, double cutoff, size_t resolution,
                   const double *values_re, const double *values_im,
                   size_t len, char **out_json);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* PETERWEYL_H */
