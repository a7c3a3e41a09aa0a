#pragma once

#include <span>

#include "normalizer.hpp"

namespace qhuber {

struct TauSolveConfig {
  double tau_lo = 0.001;
  double tau_hi = 0.999;
  double grad_tol = 0.0;  // <= 0 selects 1e-10 * n
  int max_iter = 100;
};

struct TauSolveResult {
  double tau = 0.5;
  double value = 0.0;   // normalized loss at tau
  double grad = 0.0;    // d/dtau of normalized loss at tau
  int iterations = 0;
  bool converged = false;
};

// Minimizes normalized_loss over tau in [tau_lo, tau_hi] for fixed residuals.
// Safeguarded Newton: start from the midpoint 0.5, keep a sign-changing
// bracket on the gradient, take the Newton step when it lands inside the
// bracket and shrinks |grad|, otherwise bisect.  A bound with inward-pointing
// gradient is returned as converged (the minimum sits on the boundary).
TauSolveResult solve_tau(std::span<const double> residuals, double kappa,
                         const TauSolveConfig& cfg = {});

}  // namespace qhuber
