#include "varpro_solver.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

#include "errors.hpp"

namespace qhuber {

void validate_model(const AffineModel& m) {
  if (m.design.cols < 1 || m.design.rows < m.design.cols)
    throw std::domain_error("model needs rows >= cols >= 1");
  if (m.response.size() != m.design.rows)
    throw std::domain_error("response length does not match design rows");
  for (double v : m.design.data)
    if (!std::isfinite(v)) throw std::domain_error("design entry not finite");
  for (double v : m.response)
    if (!std::isfinite(v)) throw std::domain_error("response entry not finite");
}

static void validate_solver_config(const SolverConfig& cfg) {
  if (!std::isfinite(cfg.epsilon) || cfg.epsilon <= 0.0)
    throw std::domain_error("epsilon must be positive");
  if (cfg.max_iter < 1) throw std::domain_error("max_iter must be >= 1");
  if (cfg.memory < 1) throw std::domain_error("memory must be >= 1");
  if (!(cfg.ls_shrink > 0.0 && cfg.ls_shrink < 1.0))
    throw std::domain_error("ls_shrink must be in (0, 1)");
  if (!(cfg.ls_c1 > 0.0 && cfg.ls_c1 < 1.0))
    throw std::domain_error("ls_c1 must be in (0, 1)");
  if (!std::isfinite(cfg.kappa) || cfg.kappa <= 0.0)
    throw std::domain_error("solver requires kappa > 0");
}

static std::vector<double> residuals(const AffineModel& m,
                                     std::span<const double> x) {
  std::vector<double> r(m.design.rows);
  matvec(m.design, x, r);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = m.response[i] - r[i];
  return r;
}

double objective(const AffineModel& m, std::span<const double> x, double tau,
                 double kappa) {
  validate_model(m);
  if (x.size() != m.design.cols)
    throw std::domain_error("x length does not match design cols");
  const std::vector<double> r = residuals(m, x);
  return normalized_loss(r, {tau, kappa}).value;
}

static std::vector<double> loss_gradient(const AffineModel& m,
                                         std::span<const double> r, double tau,
                                         double kappa) {
  std::vector<double> dr(r.size());
  for (std::size_t i = 0; i < r.size(); ++i)
    dr[i] = quantile_huber_dr(r[i], {tau, kappa});
  std::vector<double> g(m.design.cols);
  matvec_transposed(m.design, dr, g);
  for (double& v : g) v = -v;
  return g;
}

ProjectedGradient projected_gradient(const AffineModel& m,
                                     std::span<const double> x, double kappa,
                                     const TauSolveConfig& tau_cfg) {
  validate_model(m);
  if (x.size() != m.design.cols)
    throw std::domain_error("x length does not match design cols");
  if (!std::isfinite(kappa) || kappa <= 0.0)
    throw std::domain_error("projected gradient requires kappa > 0");
  const std::vector<double> r = residuals(m, x);
  const TauSolveResult ts = solve_tau(r, kappa, tau_cfg);
  if (!ts.converged)
    throw ConvergenceError("inner tau solve did not converge");
  ProjectedGradient out;
  out.grad = loss_gradient(m, r, ts.tau, kappa);
  out.tau = ts.tau;
  out.value = ts.value;
  return out;
}

namespace {

struct EvalOut {
  double value = 0.0;
  std::vector<double> grad;
  double tau = 0.5;
};

struct LbfgsPair {
  std::vector<double> s, y;
  double rho = 0.0;
};

std::vector<double> two_loop(const std::vector<double>& g,
                             const std::deque<LbfgsPair>& hist) {
  std::vector<double> q = g;
  std::vector<double> alpha(hist.size(), 0.0);
  for (std::size_t i = hist.size(); i-- > 0;) {
    alpha[i] = hist[i].rho * dot(hist[i].s, q);
    for (std::size_t j = 0; j < q.size(); ++j) q[j] -= alpha[i] * hist[i].y[j];
  }
  if (!hist.empty()) {
    const LbfgsPair& last = hist.back();
    // Clamp the scaling: near-flat stretches of the objective produce pairs
    // with tiny y whose raw ratio would blow the direction up.
    double gamma = dot(last.s, last.y) / dot(last.y, last.y);
    if (!std::isfinite(gamma) || gamma <= 0.0) gamma = 1.0;
    gamma = std::min(std::max(gamma, 1e-8), 1e8);
    for (double& v : q) v *= gamma;
  }
  for (std::size_t i = 0; i < hist.size(); ++i) {
    const double beta = hist[i].rho * dot(hist[i].y, q);
    for (std::size_t j = 0; j < q.size(); ++j)
      q[j] += (alpha[i] - beta) * hist[i].s[j];
  }
  return q;
}

template <class F>
JointSolution lbfgs_drive(std::size_t p, const F& eval, const SolverConfig& cfg) {
  std::vector<double> x(p, 0.0);
  EvalOut cur = eval(x);
  const double g0 = norm2(cur.grad);
  const auto grad_small = [&](double gnorm) {
    return gnorm <= cfg.epsilon * (1.0 + g0);
  };

  JointSolution out;
  out.trace.push_back(cur.value);
  std::deque<LbfgsPair> hist;
  std::vector<double> xt(p);
  double err = g0;
  bool converged = false;
  SolveStatus status = SolveStatus::MaxIterations;
  int k = 0;

  for (; k < cfg.max_iter; ++k) {
    std::vector<double> d = two_loop(cur.grad, hist);
    err = norm2(d);
    const double gnorm = norm2(cur.grad);
    if (err <= cfg.epsilon && grad_small(gnorm)) {
      converged = true;
      status = SolveStatus::Converged;
      break;
    }
    double gd = dot(cur.grad, d);
    if (!(gd > 0.0)) {
      // History produced a non-descent direction; fall back to the gradient.
      hist.clear();
      d = cur.grad;
      gd = dot(d, d);
      err = norm2(d);
      if (gd == 0.0) {
        converged = true;
        status = SolveStatus::Converged;
        break;
      }
    }

    EvalOut trial;
    const auto backtrack = [&](const std::vector<double>& dir, double slope) {
      double step = 1.0;
      while (step >= 1e-14) {
        for (std::size_t j = 0; j < p; ++j) xt[j] = x[j] - step * dir[j];
        trial = eval(xt);
        if (trial.value <= cur.value - cfg.ls_c1 * step * slope) return true;
        step *= cfg.ls_shrink;
      }
      return false;
    };

    bool accepted = backtrack(d, gd);
    if (!accepted && !hist.empty()) {
      // The quasi-Newton direction may be badly scaled here; retry plain
      // steepest descent with a fresh history before giving up.
      hist.clear();
      d = cur.grad;
      gd = dot(d, d);
      err = norm2(d);
      accepted = backtrack(d, gd);
    }
    if (!accepted) {
      status = SolveStatus::LineSearchStalled;
      converged = grad_small(gnorm);
      if (converged) status = SolveStatus::Converged;
      break;
    }

    LbfgsPair pair;
    pair.s.resize(p);
    pair.y.resize(p);
    for (std::size_t j = 0; j < p; ++j) {
      pair.s[j] = xt[j] - x[j];
      pair.y[j] = trial.grad[j] - cur.grad[j];
    }
    const double sy = dot(pair.s, pair.y);
    const double ny = norm2(pair.y);
    // Gradient changes at roundoff level carry no curvature information and
    // would poison the inverse-Hessian scale.
    if (sy > 1e-10 * norm2(pair.s) * ny &&
        ny > 1e-12 * (1.0 + norm2(cur.grad))) {
      pair.rho = 1.0 / sy;
      hist.push_back(std::move(pair));
      if (hist.size() > static_cast<std::size_t>(cfg.memory)) hist.pop_front();
    }
    x = xt;
    cur = std::move(trial);
    out.trace.push_back(cur.value);
  }

  if (k == cfg.max_iter) {
    // Ran out of iterations; report the direction norm at the final iterate.
    const std::vector<double> d = two_loop(cur.grad, hist);
    err = norm2(d);
    if (err <= cfg.epsilon && grad_small(norm2(cur.grad))) {
      converged = true;
      status = SolveStatus::Converged;
    }
  }

  out.x = std::move(x);
  out.tau = cur.tau;
  out.objective = cur.value;
  out.iterations = k;
  out.err = err;
  out.converged = converged;
  out.status = status;
  return out;
}

}  // namespace

JointSolution solve_joint(const AffineModel& m, const SolverConfig& cfg) {
  validate_model(m);
  validate_solver_config(cfg);
  const auto eval = [&](const std::vector<double>& x) {
    const std::vector<double> r = residuals(m, x);
    const TauSolveResult ts = solve_tau(r, cfg.kappa, cfg.tau_cfg);
    if (!ts.converged) throw ConvergenceError("inner tau solve did not converge");
    EvalOut out;
    out.value = ts.value;
    out.grad = loss_gradient(m, r, ts.tau, cfg.kappa);
    out.tau = ts.tau;
    return out;
  };
  return lbfgs_drive(m.design.cols, eval, cfg);
}

JointSolution solve_fixed_tau(const AffineModel& m, double tau,
                              const SolverConfig& cfg) {
  validate_model(m);
  validate_solver_config(cfg);
  if (!std::isfinite(tau) || tau <= 0.0 || tau >= 1.0)
    throw std::domain_error("fixed tau must lie strictly inside (0, 1)");
  const auto eval = [&](const std::vector<double>& x) {
    const std::vector<double> r = residuals(m, x);
    EvalOut out;
    out.value = normalized_loss(r, {tau, cfg.kappa}).value;
    out.grad = loss_gradient(m, r, tau, cfg.kappa);
    out.tau = tau;
    return out;
  };
  return lbfgs_drive(m.design.cols, eval, cfg);
}

std::vector<double> least_squares(const AffineModel& m) {
  validate_model(m);
  return qr_solve(m.design, m.response);
}

double bordered_determinant(double h_second_derivative) {
  if (!std::isfinite(h_second_derivative))
    throw std::domain_error("h'' must be finite");
  const double a = h_second_derivative, b = 1.0, c = 1.0, d = 0.0;
  return a * d - b * c;
}

}  // namespace qhuber
