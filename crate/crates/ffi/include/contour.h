#ifndef CONTOUR_H
#define CONTOUR_H

#include <stddef.h>

// Result codes returned by every fallible function.
typedef enum ContourStatus {
  CONTOUR_STATUS_OK = 0,
  CONTOUR_STATUS_NULL_POINTER = 1,
  CONTOUR_STATUS_INVALID_ARGUMENT = 2,
  CONTOUR_STATUS_DIMENSION_MISMATCH = 3,
  CONTOUR_STATUS_NON_FINITE_INPUT = 4,
  CONTOUR_STATUS_SINGULAR_COVARIANCE = 5,
  CONTOUR_STATUS_EMPTY_SELECTION = 6,
  CONTOUR_STATUS_DEGENERATE_DATA = 7,
  CONTOUR_STATUS_INSUFFICIENT_DATA = 8,
  CONTOUR_STATUS_BUFFER_TOO_SMALL = 9,
  CONTOUR_STATUS_INTERNAL = 10,
} ContourStatus;

// Subspace distance norm.
typedef enum ContourNorm {
  CONTOUR_NORM_FROBENIUS = 0,
  CONTOUR_NORM_SPECTRAL = 1,
} ContourNorm;

// Predictor matrix and response vector.
typedef struct ContourDataset ContourDataset;

// Fitted reduction: basis, kernel spectrum and method.
typedef struct ContourEstimate ContourEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread; empty after a success.
// The pointer stays valid until the next call into this library on the same thread.
const char *contour_last_error(void);

// Library version as a static NUL-terminated string.
const char *contour_version(void);

// Copies an `n`×`p` row-major predictor matrix and an `n`-vector response
// into a new data set.
//
// # Safety
// `x` must point to `n * p` doubles, `y` to `n` doubles, and `out` must be writable.
enum ContourStatus contour_dataset_new(const double *x,
                                       const double *y,
                                       size_t n,
                                       size_t p,
                                       struct ContourDataset **out);

// Releases a data set. Null is ignored.
//
// # Safety
// `ds` must come from [`contour_dataset_new`] and not be freed twice.
void contour_dataset_free(struct ContourDataset *ds);

// Simple contour regression keeping the fraction `r` of pairs with the
// smallest response increments.
//
// # Safety
// `ds` must be a live data set and `out` writable.
enum ContourStatus contour_fit_scr(const struct ContourDataset *ds,
                                   size_t q,
                                   double r,
                                   struct ContourEstimate **out);

// General contour regression with tube radius `rho` on the standardized
// scale, keeping the fraction `r` of pairs with the smallest tube variance.
//
// # Safety
// `ds` must be a live data set and `out` writable.
enum ContourStatus contour_fit_gcr(const struct ContourDataset *ds,
                                   size_t q,
                                   double r,
                                   double rho,
                                   struct ContourEstimate **out);

// Sliced inverse regression with `slices` equal-count slices.
//
// # Safety
// `ds` must be a live data set and `out` writable.
enum ContourStatus contour_fit_sir(const struct ContourDataset *ds,
                                   size_t q,
                                   size_t slices,
                                   struct ContourEstimate **out);

// Sliced average variance estimation with `slices` equal-count slices.
//
// # Safety
// `ds` must be a live data set and `out` writable.
enum ContourStatus contour_fit_save(const struct ContourDataset *ds,
                                    size_t q,
                                    size_t slices,
                                    struct ContourEstimate **out);

// Principal Hessian directions.
//
// # Safety
// `ds` must be a live data set and `out` writable.
enum ContourStatus contour_fit_phd(const struct ContourDataset *ds,
                                   size_t q,
                                   struct ContourEstimate **out);

// Least-squares slope direction (one-dimensional).
//
// # Safety
// `ds` must be a live data set and `out` writable.
enum ContourStatus contour_fit_ols(const struct ContourDataset *ds, struct ContourEstimate **out);

// Fits a method given as text, e.g. `"gcr:r=0.05:rho=2"`, `"scr:r=6qn"` or `"sir:h=6"`.
//
// # Safety
// `method` must be a NUL-terminated string, `ds` a live data set and `out` writable.
enum ContourStatus contour_fit(const struct ContourDataset *ds,
                               const char *method,
                               size_t q,
                               struct ContourEstimate **out);

// Writes the predictor dimension and reduction dimension of an estimate.
//
// # Safety
// `est` must be a live estimate; `p` and `q` must be writable.
enum ContourStatus contour_estimate_dims(const struct ContourEstimate *est, size_t *p, size_t *q);

// Copies the `p`×`q` basis (orthonormal columns, original predictor scale)
// row-major into `buf`, which must hold at least `len` doubles.
//
// # Safety
// `est` must be a live estimate and `buf` must point to `len` writable doubles.
enum ContourStatus contour_estimate_basis(const struct ContourEstimate *est,
                                          double *buf,
                                          size_t len);

// Copies the `p` kernel eigenvalues, descending, into `buf`.
//
// # Safety
// `est` must be a live estimate and `buf` must point to `len` writable doubles.
enum ContourStatus contour_estimate_eigenvalues(const struct ContourEstimate *est,
                                                double *buf,
                                                size_t len);

// Distance between the subspaces spanned by two estimates.
//
// # Safety
// `a` and `b` must be live estimates and `out` writable.
enum ContourStatus contour_estimate_distance(const struct ContourEstimate *a,
                                             const struct ContourEstimate *b,
                                             enum ContourNorm norm,
                                             double *out);

// Distance between an estimate and a caller-supplied `p`×`k` row-major basis.
//
// # Safety
// `est` must be a live estimate, `basis` must point to `p * k` doubles and `out` be writable.
enum ContourStatus contour_estimate_distance_to(const struct ContourEstimate *est,
                                                const double *basis,
                                                size_t p,
                                                size_t k,
                                                enum ContourNorm norm,
                                                double *out);

// Releases an estimate. Null is ignored.
//
// # Safety
// `est` must come from a `contour_fit*` function and not be freed twice.
void contour_estimate_free(struct ContourEstimate *est);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CONTOUR_H */
