/* Quantile Huber regression with jointly inferred asymmetry level.
 *
 * Every function returns a qh_status; outputs are written through caller
 * buffers or opaque handles.  On failure qh_last_error() describes what went
 * wrong (thread-local).  Solver entry points that run out of iterations
 * return QH_ERR_CONVERGENCE but still fill their outputs with the best
 * iterate found.
 */
#ifndef QHUBER_H
#define QHUBER_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qh_status {
  QH_OK = 0,
  QH_ERR_DOMAIN = 1,      /* invalid argument or precondition violation */
  QH_ERR_CONVERGENCE = 2, /* iteration budget exhausted */
  QH_ERR_UNSUPPORTED = 3, /* operation not defined for these parameters */
  QH_ERR_PARSE = 4,       /* malformed file contents */
  QH_ERR_IO = 5,          /* filesystem failure */
  QH_ERR_INTERNAL = 6
} qh_status;

const char* qh_status_name(qh_status s);
const char* qh_last_error(void);
const char* qh_version(void);

/* ---------- loss kernels ---------- */

/* Tilted absolute loss (-tau + [r >= 0]) * r; tau in [0, 1]. */
qh_status qh_quantile_loss(double r, double tau, double* out);

/* Smoothed tilted loss; kappa = 0 falls back to qh_quantile_loss. */
qh_status qh_quantile_huber(double r, double tau, double kappa, double* out);

/* d/dr of the smoothed loss; kappa = 0 is QH_ERR_UNSUPPORTED. */
qh_status qh_quantile_huber_dr(double r, double tau, double kappa, double* out);

/* Loss value with first and second partials in tau.  Any output pointer may
 * be NULL to skip it. */
qh_status qh_tau_calculus(double r, double tau, double kappa, double* value,
                          double* d_tau, double* d2_tau);

/* Sum of qh_tau_calculus over a residual vector (n >= 1). */
qh_status qh_total_loss(const double* residuals, size_t n, double tau,
                        double kappa, double* value, double* d_tau,
                        double* d2_tau);

/* Brute-force Moreau-envelope evaluation of the smoothed loss on a z-grid
 * with grid_resolution (>= 1000) subintervals; independent check only. */
qh_status qh_moreau_oracle(double r, double tau, double kappa,
                           size_t grid_resolution, double* out);

/* ---------- normalizer ---------- */

qh_status qh_std_normal_cdf(double x, double* out);

typedef struct qh_normalization_eval {
  double c;
  double c_prime;
  double c_double_prime;
  double log_c;
  double dlog_c;
  double d2log_c;
} qh_normalization_eval;

/* Closed-form partition function of exp(-loss) and its tau-derivatives;
 * tau strictly inside (0, 1), kappa >= 0. */
qh_status qh_normalization(double tau, double kappa, qh_normalization_eval* out);

/* Total loss plus n * log c(tau), with tau-derivatives. */
qh_status qh_normalized_loss(const double* residuals, size_t n, double tau,
                             double kappa, double* value, double* d_tau,
                             double* d2_tau);

/* Minimum over the tau grid [tau_lo, tau_hi] (step tau_step) of
 * (log c)'' - kappa.  Positive values certify strict convexity in tau. */
qh_status qh_convexity_certificate(double kappa, double tau_lo, double tau_hi,
                                   double tau_step, double* out);

/* Adaptive-quadrature check of the closed-form c. */
qh_status qh_c_quadrature_oracle(double tau, double kappa, double tolerance,
                                 double* out);

/* ---------- tau inference ---------- */

typedef struct qh_tau_solve_config {
  double tau_lo;   /* default 0.001 */
  double tau_hi;   /* default 0.999 */
  double grad_tol; /* <= 0 selects 1e-10 * n */
  int max_iter;    /* default 100 */
} qh_tau_solve_config;

qh_tau_solve_config qh_tau_solve_config_default(void);

typedef struct qh_tau_solve_result {
  double tau;
  double value;
  double grad;
  int iterations;
  int converged;
} qh_tau_solve_result;

/* Safeguarded Newton minimization of the normalized loss over tau for fixed
 * residuals.  cfg may be NULL for defaults. */
qh_status qh_solve_tau(const double* residuals, size_t n, double kappa,
                       const qh_tau_solve_config* cfg, qh_tau_solve_result* out);

/* ---------- joint solver ---------- */

typedef struct qh_solver_config {
  double epsilon;   /* default 1e-6 */
  int max_iter;     /* default 500 */
  int memory;       /* default 10 */
  double ls_shrink; /* default 0.5 */
  double ls_c1;     /* default 1e-4 */
  double kappa;     /* default 1.0 */
  qh_tau_solve_config tau;
} qh_solver_config;

qh_solver_config qh_solver_config_default(void);

typedef enum qh_solve_status {
  QH_SOLVE_CONVERGED = 0,
  QH_SOLVE_MAX_ITERATIONS = 1,
  QH_SOLVE_LINE_SEARCH_STALLED = 2
} qh_solve_status;

typedef struct qh_solve_info {
  double tau;
  double objective;
  double err; /* norm of the final quasi-Newton direction */
  int iterations;
  int converged;
  int status; /* qh_solve_status */
} qh_solve_info;

/* Variable projection: minimizes min_tau of the normalized loss of
 * response - design * x.  design is row-major rows x cols; x_out has room
 * for cols entries.  cfg and info may be NULL. */
qh_status qh_solve_joint(const double* design, size_t rows, size_t cols,
                         const double* response, const qh_solver_config* cfg,
                         double* x_out, qh_solve_info* info);

/* Same outer iteration with tau held fixed. */
qh_status qh_solve_fixed_tau(const double* design, size_t rows, size_t cols,
                             const double* response, double tau,
                             const qh_solver_config* cfg, double* x_out,
                             qh_solve_info* info);

/* Ordinary least squares baseline; QH_ERR_DOMAIN on rank deficiency. */
qh_status qh_least_squares(const double* design, size_t rows, size_t cols,
                           const double* response, double* x_out);

/* Normalized loss of response - design * x at the given (tau, kappa). */
qh_status qh_objective(const double* design, size_t rows, size_t cols,
                       const double* response, const double* x, double tau,
                       double kappa, double* out);

/* Gradient of the projected objective at x, with the inferred tau and the
 * objective value.  grad_out has room for cols entries; tau_out/value_out
 * may be NULL. */
qh_status qh_projected_gradient(const double* design, size_t rows, size_t cols,
                                const double* response, const double* x,
                                double kappa, const qh_tau_solve_config* cfg,
                                double* grad_out, double* tau_out,
                                double* value_out);

/* Determinant of [[h'', 1], [1, 0]] for the inner stationarity system. */
qh_status qh_bordered_determinant(double h_second, double* out);

/* ---------- synthetic data ---------- */

/* n Laplace-magnitude draws with exactly round(n * pos_fraction) positive
 * signs at random positions; sigma = 0 writes zeros. */
qh_status qh_sample_sign_mixed_laplace(uint64_t seed, uint64_t stream, size_t n,
                                       double sigma, double pos_fraction,
                                       double* out);

/* Standard normal design (row-major n x p) and response
 * design * x_true + sign-mixed noise. */
qh_status qh_gen_linear_demo(uint64_t seed, uint64_t stream, size_t n, size_t p,
                             const double* x_true, double sigma,
                             double pos_fraction, double* design_out,
                             double* response_out);

/* ---------- datasets ---------- */

typedef struct qh_dataset qh_dataset;

/* Comma-separated with a header; the last column is the response. */
qh_status qh_dataset_load_csv(const char* path, qh_dataset** out);
qh_status qh_dataset_create(const double* features, size_t rows, size_t cols,
                            const double* response, qh_dataset** out);
qh_status qh_dataset_save_csv(const qh_dataset* ds, const char* path);
void qh_dataset_free(qh_dataset* ds);

size_t qh_dataset_rows(const qh_dataset* ds);
size_t qh_dataset_cols(const qh_dataset* ds); /* feature columns */
qh_status qh_dataset_features(const qh_dataset* ds, double* out);
qh_status qh_dataset_response(const qh_dataset* ds, double* out);
const char* qh_dataset_feature_name(const qh_dataset* ds, size_t j);

/* Per-column affine map onto [-1, 1] (constant columns collapse to 0).
 * scales/offsets, when non-NULL, receive cols + 1 entries each with the
 * response map last. */
qh_status qh_dataset_rescale(const qh_dataset* ds, qh_dataset** out,
                             double* scales, double* offsets);

/* Shuffle split; floor(rows * train_fraction) rows go to train. */
qh_status qh_dataset_split(const qh_dataset* ds, double train_fraction,
                           uint64_t seed, uint64_t stream, qh_dataset** train,
                           qh_dataset** validation);

/* ---------- gradient boosting ---------- */

typedef struct qh_gbm_model qh_gbm_model;

typedef struct qh_gbm_config {
  int n_stages;    /* default 200 */
  int max_depth;   /* default 3 */
  size_t min_leaf; /* default 5 */
  double kappa;    /* default 0.05; overrides solver.kappa */
  double tau0;     /* default 0.5 */
  double beta_cap; /* default 1e3 */
  qh_solver_config solver;
} qh_gbm_config;

qh_gbm_config qh_gbm_config_default(void);

/* Fits on the dataset's features/response.  If a stage solve fails the model
 * keeps the completed stages, *completed_out (when non-NULL) is set to 0 and
 * qh_last_error() explains; the call still returns QH_OK. */
qh_status qh_gbm_fit(const qh_dataset* train, const qh_gbm_config* cfg,
                     qh_gbm_model** out, int* completed_out);
void qh_gbm_free(qh_gbm_model* model);

size_t qh_gbm_num_stages(const qh_gbm_model* model);
double qh_gbm_intercept(const qh_gbm_model* model);
qh_status qh_gbm_stage_info(const qh_gbm_model* model, size_t stage,
                            double* beta, double* tau, double* train_loss);

/* features is row-major rows x cols; cols must match training. */
qh_status qh_gbm_predict(const qh_gbm_model* model, const double* features,
                         size_t rows, size_t cols, double* out);

qh_status qh_gbm_save(const qh_gbm_model* model, const char* path);
qh_status qh_gbm_load(const char* path, qh_gbm_model** out);

#ifdef __cplusplus
}
#endif

#endif /* QHUBER_H */
