/*
 * loca — sparse spectral adaptation laboratory.
 *
 * C API over the core library: dense-matrix transforms, budgeted spectral
 * approximators, random-matrix diagnostics, and the seeded experiment
 * runners behind the CLI. All handles are opaque; every fallible call
 * returns a loca_status and leaves a human-readable message in
 * loca_last_error() on failure.
 */
#ifndef LOCA_H
#define LOCA_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum loca_status {
  LOCA_OK = 0,
  LOCA_ERR_INVALID_ARGUMENT = 1,
  LOCA_ERR_DIMENSION_MISMATCH = 2,
  LOCA_ERR_OUT_OF_BOUNDS = 3,
  LOCA_ERR_NUMERIC = 4,
  LOCA_ERR_IO = 5,
  LOCA_ERR_DIVERGED = 6,
  LOCA_ERR_ACCEPTANCE = 7,
  LOCA_ERR_CONFIG = 8
} loca_status;

/* Dense row-major double matrix. */
typedef struct loca_matrix loca_matrix;

/* Flat key-value experiment configuration. */
typedef struct loca_config loca_config;

const char* loca_version(void);

/* Thread-local message describing the most recent failure. */
const char* loca_last_error(void);

/* ---------------------------------------------------------------- matrices */

loca_matrix* loca_matrix_create(int64_t rows, int64_t cols);
loca_matrix* loca_matrix_from_data(int64_t rows, int64_t cols, const double* row_major);
void loca_matrix_destroy(loca_matrix* m);
int64_t loca_matrix_rows(const loca_matrix* m);
int64_t loca_matrix_cols(const loca_matrix* m);
loca_status loca_matrix_get(const loca_matrix* m, int64_t row, int64_t col, double* out);
loca_status loca_matrix_set(loca_matrix* m, int64_t row, int64_t col, double value);
/* Copies entries out in row-major order; `out` must hold rows*cols doubles. */
loca_status loca_matrix_copy_out(const loca_matrix* m, double* out);

/* -------------------------------------------------------------- transforms */

/* Orthonormal 2-D DCT-II and its inverse (matrix-product form). */
loca_status loca_dct2(const loca_matrix* in, loca_matrix** out);
loca_status loca_idct2(const loca_matrix* in, loca_matrix** out);

/* FFT-backed fast paths; agree with the matrix-product forms to 1e-8. */
loca_status loca_fast_dct2(const loca_matrix* in, loca_matrix** out);
loca_status loca_fast_idct2(const loca_matrix* in, loca_matrix** out);

/* Scatters `count` coefficients onto a zero rows x cols matrix at integer
 * locations (row, col pairs in `locations`, length 2*count); collisions sum. */
loca_status loca_scatter(int64_t rows, int64_t cols, const double* coeffs,
                         const int64_t* locations, int64_t count, loca_matrix** out);

/* alpha * inverse DCT of the scatter, evaluated in O(count * rows * cols). */
loca_status loca_idct2_sparse(int64_t rows, int64_t cols, const double* coeffs,
                              const int64_t* locations, int64_t count, double alpha,
                              loca_matrix** out);

/* Unitary 2-D DFT split into real and imaginary parts. */
loca_status loca_dft2(const loca_matrix* in, loca_matrix** re, loca_matrix** im);

/* ------------------------------------------------------------ approximators */

loca_status loca_lowrank_approx(const loca_matrix* in, int64_t rank, loca_matrix** out);
loca_status loca_dct_top_approx(const loca_matrix* in, int64_t budget, loca_matrix** out);
loca_status loca_fourier_top_amplitude_approx(const loca_matrix* in, int64_t cells,
                                              loca_matrix** out);
loca_status loca_fourier_top_coeff_approx(const loca_matrix* in, int64_t slots,
                                          loca_matrix** out);
/* Random retained-cell selection; `seed` drives the draw. */
loca_status loca_fourier_random_approx(const loca_matrix* in, int64_t cells, uint64_t seed,
                                       loca_matrix** out);
loca_status loca_reconstruction_error(const loca_matrix* a, const loca_matrix* b, double* out);
/* Closed-form expected retained energy for uniform random selection. */
loca_status loca_expected_random_selection(int64_t k, int64_t rank, double* out);

/* -------------------------------------------------------------- statistics */

/* Marchenko-Pastur support bounds sigma^2 (1 -+ 1/sqrt(Q))^2. */
loca_status loca_mp_support(double q_ratio, double sigma, double* lower, double* upper);

/* Eigenvalues of (1/p) W^T W (descending, `q` values) plus the fraction of
 * eigenvalue mass outside the MP support. Any output pointer may be NULL. */
loca_status loca_esd(const loca_matrix* in, double* eigenvalues, double* outside_mass);

/* Binned total variation between samples and N(mu, sigma^2). */
loca_status loca_tv_distance(const double* samples, int64_t count, double mu, double sigma,
                             int bins, double* out);

/* Mean + stderr of lambda_max(W^T W)/K over seeded Gaussian trials. */
loca_status loca_wishart_lmax_ratio(int64_t k, int64_t trials, uint64_t seed, double* mean,
                                    double* se);

/* Bound mu + sigma sqrt((n-l)/l) on the l-th largest of n i.i.d. draws. */
loca_status loca_order_stat_upper_bound(double mu, double sigma, int64_t n, int64_t l,
                                        double* out);

/* -------------------------------------------------------------- experiments */

loca_config* loca_config_create(void);
void loca_config_destroy(loca_config* cfg);
loca_status loca_config_set(loca_config* cfg, const char* key, const char* value);
/* Merges `path` (flat key = value lines, '#' comments); existing keys kept. */
loca_status loca_config_load_file(loca_config* cfg, const char* path);

/* Runs a named experiment (theorem1, theorem2, noniid, mp, normality, toy,
 * gradcheck, bench), writing CSV/JSON reports under out_dir. Returns LOCA_OK
 * on success, LOCA_ERR_CONFIG for invalid configuration, and
 * LOCA_ERR_ACCEPTANCE when the run completed but a tolerance failed. */
loca_status loca_run_experiment(const char* name, const loca_config* cfg, const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif /* LOCA_H */
