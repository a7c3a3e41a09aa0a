#include "qhuber/qhuber.h"

#include <cmath>
#include <cstring>
#include <string>

#include "datasets.hpp"
#include "errors.hpp"
#include "gbm.hpp"
#include "normalizer.hpp"
#include "tau_inference.hpp"
#include "varpro_solver.hpp"

struct qh_dataset {
  qhuber::Dataset ds;
};

struct qh_gbm_model {
  qhuber::GbmModel model;
};

namespace {

thread_local std::string g_last_error;

qh_status fail(qh_status s, const std::string& what) {
  g_last_error = what;
  return s;
}

template <class F>
qh_status guarded(F&& fn) {
  try {
    return fn();
  } catch (const std::domain_error& e) {
    return fail(QH_ERR_DOMAIN, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(QH_ERR_DOMAIN, e.what());
  } catch (const qhuber::UnsupportedError& e) {
    return fail(QH_ERR_UNSUPPORTED, e.what());
  } catch (const qhuber::ParseError& e) {
    return fail(QH_ERR_PARSE, e.what());
  } catch (const qhuber::IoError& e) {
    return fail(QH_ERR_IO, e.what());
  } catch (const qhuber::ConvergenceError& e) {
    return fail(QH_ERR_CONVERGENCE, e.what());
  } catch (const std::exception& e) {
    return fail(QH_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(QH_ERR_INTERNAL, "unknown error");
  }
}

void check(const void* p, const char* name) {
  if (p == nullptr) throw std::domain_error(std::string(name) + " is NULL");
}

qhuber::TauSolveConfig to_cpp(const qh_tau_solve_config* cfg) {
  if (cfg == nullptr) return {};
  return {cfg->tau_lo, cfg->tau_hi, cfg->grad_tol, cfg->max_iter};
}

qhuber::SolverConfig to_cpp(const qh_solver_config* cfg) {
  if (cfg == nullptr) return {};
  qhuber::SolverConfig out;
  out.epsilon = cfg->epsilon;
  out.max_iter = cfg->max_iter;
  out.memory = cfg->memory;
  out.ls_shrink = cfg->ls_shrink;
  out.ls_c1 = cfg->ls_c1;
  out.kappa = cfg->kappa;
  out.tau_cfg = to_cpp(&cfg->tau);
  return out;
}

qhuber::AffineModel make_model(const double* design, size_t rows, size_t cols,
                               const double* response) {
  check(design, "design");
  check(response, "response");
  qhuber::AffineModel m;
  m.design = qhuber::Matrix(rows, cols);
  std::memcpy(m.design.data.data(), design, rows * cols * sizeof(double));
  m.response.assign(response, response + rows);
  return m;
}

void fill_info(const qhuber::JointSolution& sol, qh_solve_info* info) {
  if (info == nullptr) return;
  info->tau = sol.tau;
  info->objective = sol.objective;
  info->err = sol.err;
  info->iterations = sol.iterations;
  info->converged = sol.converged ? 1 : 0;
  info->status = static_cast<int>(sol.status);
}

qh_status finish_solve(const qhuber::JointSolution& sol, double* x_out,
                       qh_solve_info* info) {
  for (size_t j = 0; j < sol.x.size(); ++j) x_out[j] = sol.x[j];
  fill_info(sol, info);
  if (!sol.converged) return fail(QH_ERR_CONVERGENCE, "solver did not converge");
  return QH_OK;
}

}  // namespace

extern "C" {

const char* qh_status_name(qh_status s) {
  switch (s) {
    case QH_OK: return "ok";
    case QH_ERR_DOMAIN: return "domain error";
    case QH_ERR_CONVERGENCE: return "did not converge";
    case QH_ERR_UNSUPPORTED: return "unsupported";
    case QH_ERR_PARSE: return "parse error";
    case QH_ERR_IO: return "io error";
    case QH_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* qh_last_error(void) { return g_last_error.c_str(); }

const char* qh_version(void) { return "0.1.0"; }

qh_status qh_quantile_loss(double r, double tau, double* out) {
  return guarded([&] {
    check(out, "out");
    *out = qhuber::quantile_loss(r, tau);
    return QH_OK;
  });
}

qh_status qh_quantile_huber(double r, double tau, double kappa, double* out) {
  return guarded([&] {
    check(out, "out");
    *out = qhuber::quantile_huber(r, {tau, kappa});
    return QH_OK;
  });
}

qh_status qh_quantile_huber_dr(double r, double tau, double kappa, double* out) {
  return guarded([&] {
    check(out, "out");
    *out = qhuber::quantile_huber_dr(r, {tau, kappa});
    return QH_OK;
  });
}

qh_status qh_tau_calculus(double r, double tau, double kappa, double* value,
                          double* d_tau, double* d2_tau) {
  return guarded([&] {
    const qhuber::TauCalculus t = qhuber::tau_calculus(r, {tau, kappa});
    if (value) *value = t.value;
    if (d_tau) *d_tau = t.d_tau;
    if (d2_tau) *d2_tau = t.d2_tau;
    return QH_OK;
  });
}

qh_status qh_total_loss(const double* residuals, size_t n, double tau,
                        double kappa, double* value, double* d_tau,
                        double* d2_tau) {
  return guarded([&] {
    check(residuals, "residuals");
    const qhuber::TauCalculus t =
        qhuber::total_loss({residuals, n}, {tau, kappa});
    if (value) *value = t.value;
    if (d_tau) *d_tau = t.d_tau;
    if (d2_tau) *d2_tau = t.d2_tau;
    return QH_OK;
  });
}

qh_status qh_moreau_oracle(double r, double tau, double kappa,
                           size_t grid_resolution, double* out) {
  return guarded([&] {
    check(out, "out");
    *out = qhuber::moreau_oracle(r, {tau, kappa}, grid_resolution);
    return QH_OK;
  });
}

qh_status qh_std_normal_cdf(double x, double* out) {
  return guarded([&] {
    check(out, "out");
    *out = qhuber::std_normal_cdf(x);
    return QH_OK;
  });
}

qh_status qh_normalization(double tau, double kappa, qh_normalization_eval* out) {
  return guarded([&] {
    check(out, "out");
    const qhuber::NormalizationEval nm = qhuber::normalization({tau, kappa});
    out->c = nm.c;
    out->c_prime = nm.c_prime;
    out->c_double_prime = nm.c_double_prime;
    out->log_c = nm.log_c;
    out->dlog_c = nm.dlog_c;
    out->d2log_c = nm.d2log_c;
    return QH_OK;
  });
}

qh_status qh_normalized_loss(const double* residuals, size_t n, double tau,
                             double kappa, double* value, double* d_tau,
                             double* d2_tau) {
  return guarded([&] {
    check(residuals, "residuals");
    const qhuber::NormalizedTauCalculus t =
        qhuber::normalized_loss({residuals, n}, {tau, kappa});
    if (value) *value = t.value;
    if (d_tau) *d_tau = t.d_tau;
    if (d2_tau) *d2_tau = t.d2_tau;
    return QH_OK;
  });
}

qh_status qh_convexity_certificate(double kappa, double tau_lo, double tau_hi,
                                   double tau_step, double* out) {
  return guarded([&] {
    check(out, "out");
    const std::vector<double> grid =
        qhuber::make_tau_grid(tau_lo, tau_hi, tau_step);
    *out = qhuber::convexity_certificate(kappa, grid);
    return QH_OK;
  });
}

qh_status qh_c_quadrature_oracle(double tau, double kappa, double tolerance,
                                 double* out) {
  return guarded([&] {
    check(out, "out");
    *out = qhuber::c_quadrature_oracle({tau, kappa}, tolerance);
    return QH_OK;
  });
}

qh_tau_solve_config qh_tau_solve_config_default(void) {
  const qhuber::TauSolveConfig d;
  return {d.tau_lo, d.tau_hi, d.grad_tol, d.max_iter};
}

qh_status qh_solve_tau(const double* residuals, size_t n, double kappa,
                       const qh_tau_solve_config* cfg, qh_tau_solve_result* out) {
  return guarded([&] {
    check(residuals, "residuals");
    check(out, "out");
    const qhuber::TauSolveResult r =
        qhuber::solve_tau({residuals, n}, kappa, to_cpp(cfg));
    out->tau = r.tau;
    out->value = r.value;
    out->grad = r.grad;
    out->iterations = r.iterations;
    out->converged = r.converged ? 1 : 0;
    if (!r.converged)
      return fail(QH_ERR_CONVERGENCE, "tau solve did not converge");
    return QH_OK;
  });
}

qh_solver_config qh_solver_config_default(void) {
  const qhuber::SolverConfig d;
  qh_solver_config out;
  out.epsilon = d.epsilon;
  out.max_iter = d.max_iter;
  out.memory = d.memory;
  out.ls_shrink = d.ls_shrink;
  out.ls_c1 = d.ls_c1;
  out.kappa = d.kappa;
  out.tau = qh_tau_solve_config_default();
  return out;
}

qh_status qh_solve_joint(const double* design, size_t rows, size_t cols,
                         const double* response, const qh_solver_config* cfg,
                         double* x_out, qh_solve_info* info) {
  return guarded([&] {
    check(x_out, "x_out");
    const qhuber::AffineModel m = make_model(design, rows, cols, response);
    return finish_solve(qhuber::solve_joint(m, to_cpp(cfg)), x_out, info);
  });
}

qh_status qh_solve_fixed_tau(const double* design, size_t rows, size_t cols,
                             const double* response, double tau,
                             const qh_solver_config* cfg, double* x_out,
                             qh_solve_info* info) {
  return guarded([&] {
    check(x_out, "x_out");
    const qhuber::AffineModel m = make_model(design, rows, cols, response);
    return finish_solve(qhuber::solve_fixed_tau(m, tau, to_cpp(cfg)), x_out,
                        info);
  });
}

qh_status qh_least_squares(const double* design, size_t rows, size_t cols,
                           const double* response, double* x_out) {
  return guarded([&] {
    check(x_out, "x_out");
    const qhuber::AffineModel m = make_model(design, rows, cols, response);
    const std::vector<double> x = qhuber::least_squares(m);
    for (size_t j = 0; j < x.size(); ++j) x_out[j] = x[j];
    return QH_OK;
  });
}

qh_status qh_objective(const double* design, size_t rows, size_t cols,
                       const double* response, const double* x, double tau,
                       double kappa, double* out) {
  return guarded([&] {
    check(x, "x");
    check(out, "out");
    const qhuber::AffineModel m = make_model(design, rows, cols, response);
    *out = qhuber::objective(m, {x, cols}, tau, kappa);
    return QH_OK;
  });
}

qh_status qh_projected_gradient(const double* design, size_t rows, size_t cols,
                                const double* response, const double* x,
                                double kappa, const qh_tau_solve_config* cfg,
                                double* grad_out, double* tau_out,
                                double* value_out) {
  return guarded([&] {
    check(x, "x");
    check(grad_out, "grad_out");
    const qhuber::AffineModel m = make_model(design, rows, cols, response);
    const qhuber::ProjectedGradient g =
        qhuber::projected_gradient(m, {x, cols}, kappa, to_cpp(cfg));
    for (size_t j = 0; j < g.grad.size(); ++j) grad_out[j] = g.grad[j];
    if (tau_out) *tau_out = g.tau;
    if (value_out) *value_out = g.value;
    return QH_OK;
  });
}

qh_status qh_bordered_determinant(double h_second, double* out) {
  return guarded([&] {
    check(out, "out");
    *out = qhuber::bordered_determinant(h_second);
    return QH_OK;
  });
}

qh_status qh_sample_sign_mixed_laplace(uint64_t seed, uint64_t stream, size_t n,
                                       double sigma, double pos_fraction,
                                       double* out) {
  return guarded([&] {
    check(out, "out");
    qhuber::Rng rng = qhuber::Rng::stream(seed, stream);
    const std::vector<double> v =
        qhuber::sample_sign_mixed_laplace(rng, n, {sigma, pos_fraction});
    for (size_t i = 0; i < v.size(); ++i) out[i] = v[i];
    return QH_OK;
  });
}

qh_status qh_gen_linear_demo(uint64_t seed, uint64_t stream, size_t n, size_t p,
                             const double* x_true, double sigma,
                             double pos_fraction, double* design_out,
                             double* response_out) {
  return guarded([&] {
    check(x_true, "x_true");
    check(design_out, "design_out");
    check(response_out, "response_out");
    qhuber::Rng rng = qhuber::Rng::stream(seed, stream);
    const qhuber::LinearDemo demo =
        qhuber::gen_linear_demo(rng, n, {x_true, p}, {sigma, pos_fraction});
    std::memcpy(design_out, demo.model.design.data.data(),
                n * p * sizeof(double));
    for (size_t i = 0; i < n; ++i) response_out[i] = demo.model.response[i];
    return QH_OK;
  });
}

qh_status qh_dataset_load_csv(const char* path, qh_dataset** out) {
  return guarded([&] {
    check(path, "path");
    check(out, "out");
    auto* h = new qh_dataset{qhuber::load_csv(path)};
    *out = h;
    return QH_OK;
  });
}

qh_status qh_dataset_create(const double* features, size_t rows, size_t cols,
                            const double* response, qh_dataset** out) {
  return guarded([&] {
    check(features, "features");
    check(response, "response");
    check(out, "out");
    if (rows == 0 || cols == 0)
      throw std::domain_error("dataset needs rows >= 1 and cols >= 1");
    qhuber::Dataset ds;
    ds.features = qhuber::Matrix(rows, cols);
    std::memcpy(ds.features.data.data(), features,
                rows * cols * sizeof(double));
    ds.response.assign(response, response + rows);
    for (double v : ds.features.data)
      if (!std::isfinite(v)) throw std::domain_error("feature not finite");
    for (double v : ds.response)
      if (!std::isfinite(v)) throw std::domain_error("response not finite");
    ds.feature_names.resize(cols);
    for (size_t j = 0; j < cols; ++j)
      ds.feature_names[j] = "f" + std::to_string(j);
    ds.response_name = "y";
    *out = new qh_dataset{std::move(ds)};
    return QH_OK;
  });
}

qh_status qh_dataset_save_csv(const qh_dataset* ds, const char* path) {
  return guarded([&] {
    check(ds, "ds");
    check(path, "path");
    qhuber::save_csv(ds->ds, path);
    return QH_OK;
  });
}

void qh_dataset_free(qh_dataset* ds) { delete ds; }

size_t qh_dataset_rows(const qh_dataset* ds) { return ds ? ds->ds.rows() : 0; }

size_t qh_dataset_cols(const qh_dataset* ds) { return ds ? ds->ds.cols() : 0; }

qh_status qh_dataset_features(const qh_dataset* ds, double* out) {
  return guarded([&] {
    check(ds, "ds");
    check(out, "out");
    std::memcpy(out, ds->ds.features.data.data(),
                ds->ds.rows() * ds->ds.cols() * sizeof(double));
    return QH_OK;
  });
}

qh_status qh_dataset_response(const qh_dataset* ds, double* out) {
  return guarded([&] {
    check(ds, "ds");
    check(out, "out");
    for (size_t i = 0; i < ds->ds.rows(); ++i) out[i] = ds->ds.response[i];
    return QH_OK;
  });
}

const char* qh_dataset_feature_name(const qh_dataset* ds, size_t j) {
  if (ds == nullptr || j >= ds->ds.cols()) return nullptr;
  return ds->ds.feature_names[j].c_str();
}

qh_status qh_dataset_rescale(const qh_dataset* ds, qh_dataset** out,
                             double* scales, double* offsets) {
  return guarded([&] {
    check(ds, "ds");
    check(out, "out");
    qhuber::RescaledDataset r = qhuber::rescale(ds->ds);
    if (scales || offsets) {
      for (size_t j = 0; j < r.feature_maps.size(); ++j) {
        if (scales) scales[j] = r.feature_maps[j].scale;
        if (offsets) offsets[j] = r.feature_maps[j].offset;
      }
      if (scales) scales[r.feature_maps.size()] = r.response_map.scale;
      if (offsets) offsets[r.feature_maps.size()] = r.response_map.offset;
    }
    *out = new qh_dataset{std::move(r.data)};
    return QH_OK;
  });
}

qh_status qh_dataset_split(const qh_dataset* ds, double train_fraction,
                           uint64_t seed, uint64_t stream, qh_dataset** train,
                           qh_dataset** validation) {
  return guarded([&] {
    check(ds, "ds");
    check(train, "train");
    check(validation, "validation");
    qhuber::Rng rng = qhuber::Rng::stream(seed, stream);
    qhuber::SplitResult r = qhuber::split(ds->ds, train_fraction, rng);
    *train = new qh_dataset{std::move(r.train)};
    *validation = new qh_dataset{std::move(r.validation)};
    return QH_OK;
  });
}

qh_gbm_config qh_gbm_config_default(void) {
  const qhuber::GbmConfig d;
  qh_gbm_config out;
  out.n_stages = d.n_stages;
  out.max_depth = d.max_depth;
  out.min_leaf = d.min_leaf;
  out.kappa = d.kappa;
  out.tau0 = d.tau0;
  out.beta_cap = d.beta_cap;
  out.solver = qh_solver_config_default();
  return out;
}

qh_status qh_gbm_fit(const qh_dataset* train, const qh_gbm_config* cfg,
                     qh_gbm_model** out, int* completed_out) {
  return guarded([&] {
    check(train, "train");
    check(out, "out");
    qhuber::GbmConfig c;
    if (cfg) {
      c.n_stages = cfg->n_stages;
      c.max_depth = cfg->max_depth;
      c.min_leaf = cfg->min_leaf;
      c.kappa = cfg->kappa;
      c.tau0 = cfg->tau0;
      c.beta_cap = cfg->beta_cap;
      c.solver = to_cpp(&cfg->solver);
    }
    qhuber::FitReport report;
    qhuber::GbmModel model =
        qhuber::fit_gbm(train->ds.features, train->ds.response, c, &report);
    if (completed_out) *completed_out = report.completed ? 1 : 0;
    if (!report.completed) g_last_error = report.message;
    *out = new qh_gbm_model{std::move(model)};
    return QH_OK;
  });
}

void qh_gbm_free(qh_gbm_model* model) { delete model; }

size_t qh_gbm_num_stages(const qh_gbm_model* model) {
  return model ? model->model.stages.size() : 0;
}

double qh_gbm_intercept(const qh_gbm_model* model) {
  return model ? model->model.intercept : 0.0;
}

qh_status qh_gbm_stage_info(const qh_gbm_model* model, size_t stage,
                            double* beta, double* tau, double* train_loss) {
  return guarded([&] {
    check(model, "model");
    if (stage >= model->model.stages.size())
      throw std::domain_error("stage index out of range");
    const qhuber::GbmStage& st = model->model.stages[stage];
    if (beta) *beta = st.beta;
    if (tau) *tau = st.tau;
    if (train_loss) *train_loss = st.train_loss;
    return QH_OK;
  });
}

qh_status qh_gbm_predict(const qh_gbm_model* model, const double* features,
                         size_t rows, size_t cols, double* out) {
  return guarded([&] {
    check(model, "model");
    check(features, "features");
    check(out, "out");
    qhuber::Matrix x(rows, cols);
    std::memcpy(x.data.data(), features, rows * cols * sizeof(double));
    const std::vector<double> pred = model->model.predict(x);
    for (size_t i = 0; i < pred.size(); ++i) out[i] = pred[i];
    return QH_OK;
  });
}

qh_status qh_gbm_save(const qh_gbm_model* model, const char* path) {
  return guarded([&] {
    check(model, "model");
    check(path, "path");
    qhuber::save_gbm(model->model, path);
    return QH_OK;
  });
}

qh_status qh_gbm_load(const char* path, qh_gbm_model** out) {
  return guarded([&] {
    check(path, "path");
    check(out, "out");
    *out = new qh_gbm_model{qhuber::load_gbm(path)};
    return QH_OK;
  });
}

}  // extern "C"
