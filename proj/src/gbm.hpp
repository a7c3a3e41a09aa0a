#pragma once

#include <span>
#include <string>
#include <vector>

#include "varpro_solver.hpp"

namespace qhuber {

// Binary regression tree in a flat array; feature < 0 marks a leaf.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double predict_row(std::span<const double> x) const;
  std::vector<double> predict(const Matrix& x) const;
};

// Least-squares CART: splits maximize variance reduction, thresholds sit at
// midpoints between adjacent distinct values, leaves predict the mean.
// Ties prefer the lowest feature index, then the lowest threshold.  Constant
// targets (or too few rows) give a single-leaf tree.
RegressionTree fit_tree(const Matrix& x, std::span<const double> targets,
                        int max_depth, std::size_t min_leaf);

// Pseudo-residuals: d/df of the loss at the current fit, negated, which for
// residual r = y - f is just the loss derivative in r.
std::vector<double> negative_gradient(std::span<const double> y,
                                      std::span<const double> f,
                                      const LossParams& p);

struct GbmConfig {
  int n_stages = 200;
  int max_depth = 3;
  std::size_t min_leaf = 5;
  double kappa = 0.05;
  double tau0 = 0.5;       // asymmetry used for the first stage's gradients
  double beta_cap = 1e3;   // safety clamp on stage coefficients
  SolverConfig solver{};   // solver.kappa is overridden by kappa above
};

struct GbmStage {
  RegressionTree tree;
  double beta = 0.0;
  double tau = 0.5;
  double train_loss = 0.0;  // normalized loss after applying this stage
};

struct GbmModel {
  double intercept = 0.0;
  std::size_t n_features = 0;
  double kappa = 0.05;
  std::vector<GbmStage> stages;

  double predict_row(std::span<const double> x) const;
  std::vector<double> predict(const Matrix& x) const;
};

// Joint (beta, tau) refit of one stage against the residual y - f_prev using
// the tree's predictions as a one-column design.  Throws ConvergenceError if
// the stage solve fails.
GbmStage fit_stage(std::span<const double> y, std::span<const double> f_prev,
                   const RegressionTree& tree, const Matrix& x,
                   const GbmConfig& cfg);

// Outcome bookkeeping for fit_gbm; completed = false means the model carries
// only the stages finished before a stage solve failed.
struct FitReport {
  bool completed = true;
  int stages_requested = 0;
  std::string message;
};

// Boosting loop: intercept = median(y), then per stage fit a tree to the
// pseudo-residuals at the previous stage's tau and refit (beta, tau) jointly.
GbmModel fit_gbm(const Matrix& x, std::span<const double> y,
                 const GbmConfig& cfg, FitReport* report = nullptr);

std::string gbm_to_json(const GbmModel& model);
GbmModel gbm_from_json(const std::string& text);
void save_gbm(const GbmModel& model, const std::string& path);
GbmModel load_gbm(const std::string& path);

}  // namespace qhuber
