#include "normalizer.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace qhuber {

double std_normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

static void validate_interior_tau(const LossParams& p) {
  validate_loss_params(p);
  if (p.tau <= 0.0 || p.tau >= 1.0)
    throw std::domain_error("normalization requires tau strictly inside (0, 1)");
}

NormalizationEval normalization(const LossParams& p) {
  validate_interior_tau(p);
  const double t = p.tau;
  const double u = 1.0 - p.tau;
  const double k = p.kappa;
  const double e1 = std::exp(-0.5 * k * t * t);
  const double e2 = std::exp(-0.5 * k * u * u);

  NormalizationEval out;
  out.c = e1 / t + e2 / u;
  if (k > 0.0) {
    // Mass of the central Gaussian section between the two breakpoints.
    out.c += std::sqrt(2.0 * M_PI * k) *
             (std_normal_cdf(u * std::sqrt(k)) - std_normal_cdf(-t * std::sqrt(k)));
  }
  out.c_prime = -e1 / (t * t) + e2 / (u * u);
  out.c_double_prime = (k / t + 2.0 / (t * t * t)) * e1 +
                       (k / u + 2.0 / (u * u * u)) * e2;
  out.log_c = std::log(out.c);
  out.dlog_c = out.c_prime / out.c;
  out.d2log_c = (out.c * out.c_double_prime - out.c_prime * out.c_prime) /
                (out.c * out.c);
  return out;
}

NormalizedTauCalculus normalized_loss(std::span<const double> residuals,
                                      const LossParams& p) {
  validate_interior_tau(p);
  const TauCalculus t = total_loss(residuals, p);
  const NormalizationEval nm = normalization(p);
  const double n = static_cast<double>(residuals.size());
  NormalizedTauCalculus out;
  out.value = t.value + n * nm.log_c;
  out.d_tau = t.d_tau + n * nm.dlog_c;
  out.d2_tau = t.d2_tau + n * nm.d2log_c;
  return out;
}

std::vector<double> make_tau_grid(double lo, double hi, double step) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !std::isfinite(step))
    throw std::domain_error("tau grid bounds must be finite");
  if (!(0.0 < lo && lo <= hi && hi < 1.0))
    throw std::domain_error("tau grid must satisfy 0 < lo <= hi < 1");
  if (step <= 0.0) throw std::domain_error("tau grid step must be positive");
  std::vector<double> grid;
  const double slack = step * 1e-9;
  for (std::size_t i = 0;; ++i) {
    const double v = lo + step * static_cast<double>(i);
    if (v > hi + slack) break;
    grid.push_back(std::min(v, hi));
  }
  if (grid.empty() || hi - grid.back() > slack) grid.push_back(hi);
  return grid;
}

double convexity_certificate(double kappa, std::span<const double> tau_grid) {
  if (!std::isfinite(kappa) || kappa < 0.0)
    throw std::domain_error("kappa must be finite and >= 0");
  if (tau_grid.empty()) throw std::domain_error("tau grid is empty");
  double worst = std::numeric_limits<double>::infinity();
  for (double t : tau_grid) {
    const NormalizationEval nm = normalization({t, kappa});
    const double margin = nm.d2log_c - kappa;
    if (margin < worst) worst = margin;
  }
  return worst;
}

namespace {

template <class F>
double simpson_adapt(const F& f, double a, double b, double fa, double fm,
                     double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return simpson_adapt(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_adapt(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <class F>
double integrate(const F& f, double a, double b, double tol) {
  if (a >= b) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a);
  const double fm = f(m);
  const double fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_adapt(f, a, b, fa, fm, fb, whole, tol, 48);
}

}  // namespace

double c_quadrature_oracle(const LossParams& p, double tolerance) {
  validate_interior_tau(p);
  if (!std::isfinite(tolerance) || tolerance <= 0.0)
    throw std::domain_error("tolerance must be positive");
  const auto f = [&](double r) { return std::exp(-quantile_huber(r, p)); };
  // Cut the tails where the linear branches push the integrand below 1e-16:
  // exp(-38) ~ 3e-17 with the quadratic offset absorbed into the bound.
  const double t = p.tau;
  const double u = 1.0 - p.tau;
  const double k = p.kappa;
  const double left = -(38.0 + 0.5 * k * t * t) / t;
  const double right = (38.0 + 0.5 * k * u * u) / u;
  const double lo_break = k > 0.0 ? -t * k : 0.0;
  const double hi_break = k > 0.0 ? u * k : 0.0;
  const double seg_tol = tolerance / 3.0;
  return integrate(f, left, lo_break, seg_tol) +
         integrate(f, lo_break, hi_break, seg_tol) +
         integrate(f, hi_break, right, seg_tol);
}

}  // namespace qhuber
