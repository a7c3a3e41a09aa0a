#include "tau_inference.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qhuber {

static void validate_tau_config(const TauSolveConfig& cfg) {
  if (!std::isfinite(cfg.tau_lo) || !std::isfinite(cfg.tau_hi) ||
      !(0.0 < cfg.tau_lo && cfg.tau_lo < cfg.tau_hi && cfg.tau_hi < 1.0))
    throw std::domain_error("tau bounds must satisfy 0 < tau_lo < tau_hi < 1");
  if (cfg.max_iter < 1) throw std::domain_error("max_iter must be >= 1");
}

TauSolveResult solve_tau(std::span<const double> residuals, double kappa,
                         const TauSolveConfig& cfg) {
  validate_tau_config(cfg);
  if (residuals.empty()) throw std::domain_error("residual vector is empty");
  if (!std::isfinite(kappa) || kappa < 0.0)
    throw std::domain_error("kappa must be finite and >= 0");

  const double tol = cfg.grad_tol > 0.0
                         ? cfg.grad_tol
                         : 1e-10 * static_cast<double>(residuals.size());
  const auto eval = [&](double t) { return normalized_loss(residuals, {t, kappa}); };

  double lo = cfg.tau_lo;
  double hi = cfg.tau_hi;

  // Boundary minima: gradient pointing into the interval pins tau at the bound.
  const NormalizedTauCalculus at_lo = eval(lo);
  if (at_lo.d_tau >= 0.0)
    return {lo, at_lo.value, at_lo.d_tau, 0, true};
  const NormalizedTauCalculus at_hi = eval(hi);
  if (at_hi.d_tau <= 0.0)
    return {hi, at_hi.value, at_hi.d_tau, 0, true};

  double t = std::clamp(0.5, lo, hi);
  NormalizedTauCalculus cur = eval(t);
  int iter = 0;
  for (; iter < cfg.max_iter; ++iter) {
    if (std::fabs(cur.d_tau) <= tol)
      return {t, cur.value, cur.d_tau, iter, true};
    if (cur.d_tau > 0.0)
      hi = t;
    else
      lo = t;
    bool stepped = false;
    if (cur.d2_tau > 0.0) {
      const double tn = t - cur.d_tau / cur.d2_tau;
      if (lo < tn && tn < hi) {
        const NormalizedTauCalculus cand = eval(tn);
        if (std::fabs(cand.d_tau) < std::fabs(cur.d_tau)) {
          t = tn;
          cur = cand;
          stepped = true;
        }
      }
    }
    if (!stepped) {
      t = 0.5 * (lo + hi);
      cur = eval(t);
    }
  }
  return {t, cur.value, cur.d_tau, iter, false};
}

}  // namespace qhuber
