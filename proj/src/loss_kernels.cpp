#include "loss_kernels.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "errors.hpp"

namespace qhuber {

void validate_loss_params(const LossParams& p) {
  if (!std::isfinite(p.tau) || p.tau < 0.0 || p.tau > 1.0)
    throw std::domain_error("tau must be finite and in [0, 1]");
  if (!std::isfinite(p.kappa) || p.kappa < 0.0)
    throw std::domain_error("kappa must be finite and >= 0");
}

static void validate_residual(double r) {
  if (!std::isfinite(r)) throw std::domain_error("residual must be finite");
}

double quantile_loss(double r, double tau) {
  validate_loss_params({tau, 0.0});
  validate_residual(r);
  return r >= 0.0 ? (1.0 - tau) * r : -tau * r;
}

double quantile_huber(double r, const LossParams& p) {
  validate_loss_params(p);
  validate_residual(r);
  if (p.kappa == 0.0) return quantile_loss(r, p.tau);
  const double lo = -p.tau * p.kappa;
  const double hi = (1.0 - p.tau) * p.kappa;
  if (r < lo) return -p.tau * r - 0.5 * p.kappa * p.tau * p.tau;
  if (r > hi) return (1.0 - p.tau) * r - 0.5 * p.kappa * (1.0 - p.tau) * (1.0 - p.tau);
  return r * r / (2.0 * p.kappa);
}

double quantile_huber_dr(double r, const LossParams& p) {
  validate_loss_params(p);
  validate_residual(r);
  if (p.kappa == 0.0)
    throw UnsupportedError("residual derivative undefined for kappa = 0");
  if (r < -p.tau * p.kappa) return -p.tau;
  if (r > (1.0 - p.tau) * p.kappa) return 1.0 - p.tau;
  return r / p.kappa;
}

TauCalculus tau_calculus(double r, const LossParams& p) {
  validate_loss_params(p);
  validate_residual(r);
  TauCalculus out;
  out.value = quantile_huber(r, p);
  if (p.kappa == 0.0) {
    // d/dtau of (-tau + [r >= 0]) * r is -r on both branches.
    out.d_tau = -r;
    out.d2_tau = 0.0;
    return out;
  }
  if (r < -p.tau * p.kappa) {
    out.d_tau = -r - p.kappa * p.tau;
    out.d2_tau = -p.kappa;
  } else if (r > (1.0 - p.tau) * p.kappa) {
    out.d_tau = -r + p.kappa * (1.0 - p.tau);
    out.d2_tau = -p.kappa;
  } else {
    out.d_tau = 0.0;
    out.d2_tau = 0.0;
  }
  return out;
}

TauCalculus total_loss(std::span<const double> residuals, const LossParams& p) {
  validate_loss_params(p);
  if (residuals.empty()) throw std::domain_error("residual vector is empty");
  TauCalculus acc;
  for (double r : residuals) {
    const TauCalculus t = tau_calculus(r, p);
    acc.value += t.value;
    acc.d_tau += t.d_tau;
    acc.d2_tau += t.d2_tau;
  }
  return acc;
}

double moreau_oracle(double r, const LossParams& p, std::size_t grid_resolution) {
  validate_loss_params(p);
  validate_residual(r);
  if (p.kappa <= 0.0) throw std::domain_error("moreau_oracle requires kappa > 0");
  if (grid_resolution < 1000)
    throw std::domain_error("moreau_oracle requires grid_resolution >= 1000");
  const double half = std::fabs(r) + 1.0;
  const double step = 2.0 * half / static_cast<double>(grid_resolution);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i <= grid_resolution; ++i) {
    const double z = -half + step * static_cast<double>(i);
    const double q = z >= 0.0 ? (1.0 - p.tau) * z : -p.tau * z;
    const double v = q + (r - z) * (r - z) / (2.0 * p.kappa);
    if (v < best) best = v;
  }
  return best;
}

}  // namespace qhuber
