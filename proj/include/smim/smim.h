/* smim - spherical multi-index model toolkit.
 *
 * C interface to the estimator library: opaque handles, integer status codes,
 * thread-local error messages. All functions returning smim_status set the
 * last-error string on failure. Strings returned through char** are heap
 * allocations owned by the caller; release them with smim_string_free.
 * Handles are destroyed with their *_destroy function. All calls are
 * thread-safe; handles are immutable after creation and may be shared across
 * threads.
 */
#ifndef SMIM_H
#define SMIM_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define SMIM_API __declspec(dllexport)
#else
#define SMIM_API __attribute__((visibility("default")))
#endif

typedef enum smim_status {
  SMIM_OK = 0,
  SMIM_ERR_INVALID = 1, /* bad arguments or configuration */
  SMIM_ERR_IO = 2,      /* file i/o failure */
  SMIM_ERR_STALL = 3,   /* estimator found no usable signal */
  SMIM_ERR_INTERNAL = 4
} smim_status;

SMIM_API const char* smim_version(void);

/* Message for the most recent failure on this thread ("" if none). */
SMIM_API const char* smim_last_error(void);

/* Worker threads for internal parallel sections (default 1). Results are
 * independent of this setting. */
SMIM_API void smim_set_threads(int n);

SMIM_API void smim_string_free(char* s);

/* ---- link specifications ------------------------------------------- */

typedef struct smim_link smim_link;

/* spec syntax: parity(s=2,sigma=0.1), staircase(sigma=0.1),
 * mixture_parity(k0=1,k1=2,k2=3,p=0.3,sigma=0.1), gaussian_sim(id=he2,...),
 * gaussian_mim(s=2,id=prodsign,...), directional_mim(s=1,id=gen3,...),
 * poly(s=1,c0=0,c1=[1],sigma=0.5). */
SMIM_API smim_status smim_link_create(const char* spec, smim_link** out);
SMIM_API void smim_link_destroy(smim_link* link);
SMIM_API int smim_link_index_dim(const smim_link* link);   /* s */
SMIM_API int smim_link_label_arity(const smim_link* link); /* label coordinates */
SMIM_API smim_status smim_link_canonical(const smim_link* link, char** out);

/* ---- orthonormal frames --------------------------------------------- */

typedef struct smim_frame smim_frame;

SMIM_API smim_status smim_frame_random(int d, int s, uint64_t seed, smim_frame** out);
SMIM_API smim_status smim_frame_create(int d, int s, const double* col_major, smim_frame** out);
SMIM_API void smim_frame_destroy(smim_frame* frame);
SMIM_API int smim_frame_dim(const smim_frame* frame);
SMIM_API int smim_frame_rank(const smim_frame* frame);
SMIM_API smim_status smim_frame_data(const smim_frame* frame, double* out_col_major);
/* operator norm of the projector difference */
SMIM_API smim_status smim_frame_distance(const smim_frame* a, const smim_frame* b, double* out);
SMIM_API smim_status smim_frame_save(const smim_frame* frame, const char* path);
SMIM_API smim_status smim_frame_load(const char* path, smim_frame** out);

/* ---- datasets -------------------------------------------------------- */

typedef struct smim_dataset smim_dataset;

SMIM_API smim_status smim_dataset_generate(const smim_link* link, const smim_frame* planted,
                                           int64_t n, uint64_t seed, smim_dataset** out);
SMIM_API void smim_dataset_destroy(smim_dataset* data);
SMIM_API int smim_dataset_dim(const smim_dataset* data);
SMIM_API int64_t smim_dataset_size(const smim_dataset* data);
SMIM_API int smim_dataset_arity(const smim_dataset* data);
/* binary != 0 writes the compact float64 format, otherwise SMIM v1 text */
SMIM_API smim_status smim_dataset_save(const smim_dataset* data, const char* path, int binary);
SMIM_API smim_status smim_dataset_load(const char* path, smim_dataset** out);

/* ---- estimation ------------------------------------------------------ */

/* options: flat "key = value" lines (the [estimator]/[planner] config
 * sections). Recognized keys include estimator.degrees (comma list),
 * estimator.kernel (oracle | table:path[,path]), estimator.ranks
 * (t:s0 list | adaptive), estimator.tol, estimator.max_iter,
 * estimator.n_rot, estimator.kernel_cal, estimator.kernel_bins,
 * estimator.b_cap, estimator.seed, estimator.save_kernels, planner.mc,
 * planner.bins.
 *
 * link may be NULL for table kernels. truth (optional) adds a
 * frame_distance field to the report. Returns SMIM_ERR_STALL when the
 * estimator aborts on a degenerate step; the partial report is still
 * written. */
SMIM_API smim_status smim_estimate(const smim_dataset* data, const smim_link* link,
                                   const char* options, const smim_frame* truth,
                                   smim_frame** frame_out, char** report_json_out);

/* ---- complexity planner ---------------------------------------------- */

/* Monte Carlo planner over the planted model: per-degree xi spectra and
 * sample/query leap plans. options keys: planner.max_ell, planner.mc,
 * planner.bins, planner.seed. */
SMIM_API smim_status smim_complexity(const smim_link* link, const smim_frame* planted,
                                     const char* options, char** report_json_out);

/* Symbolic mixture-of-parities planner. options keys: symbolic.k0,
 * symbolic.k1, symbolic.k2 (coefficients of q), symbolic.p_exponent
 * (p = d^{-p_exponent q}; fractions like 3/2 accepted). */
SMIM_API smim_status smim_complexity_symbolic(const char* options, char** report_json_out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* SMIM_H */
