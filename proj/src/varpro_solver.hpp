#pragma once

#include <span>
#include <vector>

#include "linalg.hpp"
#include "tau_inference.hpp"

namespace qhuber {

// Regression instance: minimize the normalized loss of response - design * x.
struct AffineModel {
  Matrix design;
  std::vector<double> response;
};

// Throws std::domain_error unless rows >= cols >= 1, sizes agree, and every
// entry is finite.
void validate_model(const AffineModel& m);

struct SolverConfig {
  double epsilon = 1e-6;   // stop when the scaled direction norm falls below
  int max_iter = 500;
  int memory = 10;         // L-BFGS history length
  double ls_shrink = 0.5;  // backtracking factor
  double ls_c1 = 1e-4;     // Armijo slope fraction
  double kappa = 1.0;
  TauSolveConfig tau_cfg{};
};

enum class SolveStatus { Converged, MaxIterations, LineSearchStalled };

struct JointSolution {
  std::vector<double> x;
  double tau = 0.5;
  double objective = 0.0;
  int iterations = 0;
  double err = 0.0;          // norm of the last quasi-Newton direction
  bool converged = false;
  SolveStatus status = SolveStatus::MaxIterations;
  std::vector<double> trace;  // objective after each accepted step
};

// Normalized loss of the residual at (x, tau).
double objective(const AffineModel& m, std::span<const double> x, double tau,
                 double kappa);

// Gradient of the projected objective g~(x) = min_tau rho_bar(y - Ax; tau).
// The inner minimizer is solved exactly, so by the envelope theorem the
// gradient is -A^T rho'(r) evaluated at that tau.
struct ProjectedGradient {
  std::vector<double> grad;
  double tau = 0.5;
  double value = 0.0;
};
ProjectedGradient projected_gradient(const AffineModel& m,
                                     std::span<const double> x, double kappa,
                                     const TauSolveConfig& tau_cfg = {});

// Variable projection: L-BFGS with Armijo backtracking on the projected
// objective, x0 = 0, inner tau solve per evaluation.
JointSolution solve_joint(const AffineModel& m, const SolverConfig& cfg = {});

// Same outer solver with tau held fixed; the result's tau echoes the input.
JointSolution solve_fixed_tau(const AffineModel& m, double tau,
                              const SolverConfig& cfg = {});

// Ordinary least squares baseline (Householder QR).
std::vector<double> least_squares(const AffineModel& m);

// Determinant of [[h'', 1], [1, 0]]: the bordered-Hessian block whose sign
// certifies that the inner stationarity system stays solvable regardless of
// the loss curvature h''.
double bordered_determinant(double h_second_derivative);

}  // namespace qhuber
