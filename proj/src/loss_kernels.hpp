#pragma once

#include <cstddef>
#include <span>

namespace qhuber {

// Asymmetry level and smoothing width for the quantile Huber family.
// kappa = 0 selects the piecewise-linear quantile loss.
struct LossParams {
  double tau = 0.5;
  double kappa = 1.0;
};

// Throws std::domain_error unless tau in [0,1], kappa >= 0, both finite.
void validate_loss_params(const LossParams& p);

// Value of a loss together with its first and second partials in tau.
struct TauCalculus {
  double value = 0.0;
  double d_tau = 0.0;
  double d2_tau = 0.0;
};

// Tilted absolute loss: (-tau + [r >= 0]) * r.  The indicator counts r = 0
// as nonnegative, so quantile_loss(0, tau) = 0 for every tau.
double quantile_loss(double r, double tau);

// Smoothed tilted loss: linear with slope -tau left of -tau*kappa, quadratic
// r^2/(2*kappa) in between, linear with slope 1-tau right of (1-tau)*kappa.
// Continuously differentiable in r; reduces to quantile_loss when kappa = 0.
double quantile_huber(double r, const LossParams& p);

// d/dr of quantile_huber.  Requires kappa > 0 (UnsupportedError otherwise).
double quantile_huber_dr(double r, const LossParams& p);

// quantile_huber value with first and second partials in tau.
TauCalculus tau_calculus(double r, const LossParams& p);

// Sum of tau_calculus over a nonempty residual vector.
TauCalculus total_loss(std::span<const double> residuals, const LossParams& p);

// Independent check for quantile_huber: brute-force minimum of
// quantile_loss(z, tau) + (r - z)^2 / (2*kappa) over a dense z-grid spanning
// [-(|r|+1), |r|+1] with grid_resolution subintervals.  Requires kappa > 0
// and grid_resolution >= 1000.
double moreau_oracle(double r, const LossParams& p, std::size_t grid_resolution);

}  // namespace qhuber
