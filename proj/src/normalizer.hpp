#pragma once

#include <span>
#include <vector>

#include "loss_kernels.hpp"

namespace qhuber {

// Standard normal CDF, computed through erfc for full-range accuracy.
double std_normal_cdf(double x);

// Closed-form partition function of the density exp(-quantile_huber(r)) and
// its first two tau-derivatives, plus the same three quantities for log c.
struct NormalizationEval {
  double c = 0.0;
  double c_prime = 0.0;
  double c_double_prime = 0.0;
  double log_c = 0.0;
  double dlog_c = 0.0;
  double d2log_c = 0.0;
};

// Requires tau strictly inside (0, 1) and kappa >= 0.
NormalizationEval normalization(const LossParams& p);

struct NormalizedTauCalculus {
  double value = 0.0;
  double d_tau = 0.0;
  double d2_tau = 0.0;
};

// total_loss plus n * log c(tau) and matching tau-derivatives; the negative
// log-likelihood that makes different tau values comparable.
NormalizedTauCalculus normalized_loss(std::span<const double> residuals,
                                      const LossParams& p);

// Inclusive grid lo, lo+step, ... capped at hi (hi appended if the last step
// overshoots by more than a rounding slack).
std::vector<double> make_tau_grid(double lo, double hi, double step);

// min over the grid of d2/dtau2 [log c] - kappa: a lower bound certificate on
// the curvature the normalizer adds beyond what the loss can remove.  Positive
// means the normalized objective stays strictly convex in tau.
double convexity_certificate(double kappa, std::span<const double> tau_grid);

// Adaptive-Simpson integral of exp(-quantile_huber(r)) over r, split at the
// loss breakpoints, tails truncated where the integrand drops below 1e-16.
// Independent check for normalization().c.
double c_quadrature_oracle(const LossParams& p, double tolerance);

}  // namespace qhuber
