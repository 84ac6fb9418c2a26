#ifndef POSCOMM_H
#define POSCOMM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
typedef enum PcStatus {
  PC_STATUS_OK = 0,
  // The run completed but at least one check failed.
  PC_STATUS_CHECK_FAILED = 1,
  // Malformed configuration or JSON.
  PC_STATUS_CONFIG = 2,
  // A numerical accuracy or convergence guard tripped.
  PC_STATUS_NUMERICAL = 3,
  PC_STATUS_INVALID_ARGUMENT = 4,
  // The input lies outside the mathematical domain of the call.
  PC_STATUS_DOMAIN = 5,
  PC_STATUS_IO = 6,
  PC_STATUS_NULL_POINTER = 7,
  PC_STATUS_BUFFER_TOO_SMALL = 8,
  PC_STATUS_PANIC = 9,
} PcStatus;

// Discretization route for [`pc_operator_build`].
typedef enum PcRoute {
  PC_ROUTE_NYSTROM_X = 0,
  PC_ROUTE_NYSTROM_P = 1,
  PC_ROUTE_DIRECT = 2,
  PC_ROUTE_DIRECT_PROJECTED = 3,
} PcRoute;

// A real function of one variable with a holomorphic extension.
typedef struct PcFunction PcFunction;

// Uniform quadrature grid on `[-L, L)`.
typedef struct PcGrid PcGrid;

// Discretized commutator matrix.
typedef struct PcOperator PcOperator;

// Spectral summary filled by [`pc_operator_spectrum`].
typedef struct PcSpectrum {
  size_t dim;
  double min_eig;
  double max_eig;
  double trace;
  size_t numerical_rank;
  // Minimum eigenvalue above `-positivity_tol * max|lambda|`.
  bool positive;
} PcSpectrum;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *pc_version(void);

// Message of the last failure on this thread, or null. The pointer stays
// valid until the next failing call on the same thread.
const char *pc_last_error(void);

// Release a string returned by this library.
//
// # Safety
// `s` must be null or a string obtained from this library, freed once.
void pc_string_free(char *s);

// `c tanh(a (t - t0)) + d`.
//
// # Safety
// `out_fn` must be valid for writing a handle.
enum PcStatus pc_function_tanh(double c, double a, double t0, double d, struct PcFunction **out_fn);

// `c arctan((t - t0)/b) + d`.
//
// # Safety
// `out_fn` must be valid for writing a handle.
enum PcStatus pc_function_arctan(double c,
                                 double b,
                                 double t0,
                                 double d,
                                 struct PcFunction **out_fn);

// `offset + sum_k w_k tanh(pi (t - s_k) / (2 alpha))` with `n` atoms.
//
// # Safety
// `locations` and `weights` must point to `n` values each.
enum PcStatus pc_function_tanh_measure(const double *locations,
                                       const double *weights,
                                       size_t n,
                                       double offset,
                                       double alpha,
                                       struct PcFunction **out_fn);

// Function from a JSON spec as used in experiment configs, e.g.
// `{"name": "tanh", "rate": 2}`. Relative sample paths resolve against
// `base_dir`, or the working directory when it is null.
//
// # Safety
// `json` must be a NUL-terminated string; `base_dir` null or one.
enum PcStatus pc_function_from_json(const char *json,
                                    const char *base_dir,
                                    struct PcFunction **out_fn);

// # Safety
// `f` must be null or a handle from this library, freed once.
void pc_function_free(struct PcFunction *f);

// Value at a real point.
//
// # Safety
// `f` must be a live handle and `value` writable.
enum PcStatus pc_function_eval(const struct PcFunction *f, double t, double *value);

// Value at `re + i im` inside the strip of holomorphy.
//
// # Safety
// `f` must be a live handle and both outputs writable.
enum PcStatus pc_function_eval_complex(const struct PcFunction *f,
                                       double re,
                                       double im,
                                       double *out_re,
                                       double *out_im);

// Derivative at a real point.
//
// # Safety
// `f` must be a live handle and `value` writable.
enum PcStatus pc_function_derivative(const struct PcFunction *f, double t, double *value);

// Half-width of the horizontal strip where the function is holomorphic.
//
// # Safety
// `f` must be a live handle and `value` writable.
enum PcStatus pc_function_strip(const struct PcFunction *f, double *value);

// Minimum of `Im f` over a lattice in the upper half strip of width
// `alpha`; `pass` is set when it is nonnegative up to tolerance.
//
// # Safety
// `f` must be a live handle and both outputs writable.
enum PcStatus pc_herglotz_check(const struct PcFunction *f,
                                double alpha,
                                size_t samples,
                                double *min_im,
                                bool *pass);

// Averaged difference quotient of `g` at `x` with radius `r`.
//
// # Safety
// `g` must be a live handle and `value` writable.
enum PcStatus pc_averaged_quotient(const struct PcFunction *g, double x, double r, double *value);

// Nonnegative least-squares fit of samples `(ts[i], values[i])` by a tanh
// measure with atoms on `atom_grid`. The fitted function is returned as a
// new handle.
//
// # Safety
// Arrays must hold `n` and `m` values; outputs must be writable.
enum PcStatus pc_fit_tanh_measure(const double *ts,
                                  const double *values,
                                  size_t n,
                                  double alpha,
                                  const double *atom_grid,
                                  size_t m,
                                  struct PcFunction **out_fn,
                                  double *residual,
                                  bool *member);

// Grid of `points` nodes (a power of two, at least 8) on `[-L, L)`.
//
// # Safety
// `out_grid` must be writable.
enum PcStatus pc_grid_new(double half_width, size_t points, struct PcGrid **out_grid);

// # Safety
// `g` must be null or a handle from this library, freed once.
void pc_grid_free(struct PcGrid *g);

// Kernel matrix of `i[f(P), g(Q)]` on the grid.
//
// # Safety
// All handles must be live and `out_op` writable.
enum PcStatus pc_operator_build(const struct PcFunction *f,
                                const struct PcFunction *g,
                                const struct PcGrid *grid,
                                enum PcRoute route,
                                struct PcOperator **out_op);

// # Safety
// `op` must be null or a handle from this library, freed once.
void pc_operator_free(struct PcOperator *op);

// Matrix dimension, or 0 for a null handle.
//
// # Safety
// `op` must be null or a live handle.
size_t pc_operator_dim(const struct PcOperator *op);

// Copy the matrix in row-major order into `re` and `im`, each holding
// `len >= dim * dim` values.
//
// # Safety
// `re` and `im` must be writable for `len` values.
enum PcStatus pc_operator_matrix(const struct PcOperator *op, double *re, double *im, size_t len);

// Copy the nodes the matrix rows refer to.
//
// # Safety
// `nodes` must be writable for `len` values.
enum PcStatus pc_operator_nodes(const struct PcOperator *op, double *nodes, size_t len);

// Spectrum of the operator. When `eigenvalues` is non-null, the
// eigenvalues are copied in descending order; it must hold `len >= dim`
// values.
//
// # Safety
// `summary` must be writable; `eigenvalues` null or writable for `len`.
enum PcStatus pc_operator_spectrum(const struct PcOperator *op,
                                   double rank_threshold,
                                   struct PcSpectrum *summary,
                                   double *eigenvalues,
                                   size_t len);

// Matrix trace against `[f][g] / 2 pi` for Nyström routes.
//
// # Safety
// Outputs must be writable.
enum PcStatus pc_operator_trace_identity(const struct PcOperator *op,
                                         double *lhs,
                                         double *rhs,
                                         double *error);

// Run an experiment config given as JSON text and return the report as a
// JSON string (release with [`pc_string_free`]). Returns
// `PC_STATUS_CHECK_FAILED` with a report when some check fails.
//
// # Safety
// `config_json` must be a NUL-terminated string, `base_dir` null or one,
// and `report` writable.
enum PcStatus pc_run_config(const char *config_json, const char *base_dir, char **report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* POSCOMM_H */
