#pragma once

// Independent references the tests compare against: finite differences,
// dense scans, normal equations, exhaustive split search.  Deliberately
// naive; speed does not matter here.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "linalg.hpp"
#include "normalizer.hpp"

namespace oracles {

template <class F>
double central_diff1(const F& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

template <class F>
double central_diff2(const F& f, double x, double h) {
  return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

// Error relative to max(1, |reference|): relative for large references,
// absolute near zero.
inline double rel_err(double got, double want) {
  return std::fabs(got - want) / std::max(1.0, std::fabs(want));
}

// Dense-scan argmin of the normalized loss over tau.
inline double grid_argmin_tau(std::span<const double> residuals, double kappa,
                              double lo, double hi, double step) {
  double best_tau = lo;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0;; ++i) {
    double t = lo + step * static_cast<double>(i);
    if (t > hi + step * 1e-9) break;
    t = std::min(t, hi);
    const double v = qhuber::normalized_loss(residuals, {t, kappa}).value;
    if (v < best) {
      best = v;
      best_tau = t;
    }
  }
  return best_tau;
}

// Least squares via normal equations and Gaussian elimination with partial
// pivoting; a second route that shares nothing with the QR path.
inline std::vector<double> normal_equations_ls(const qhuber::Matrix& a,
                                               std::span<const double> b) {
  const std::size_t n = a.rows;
  const std::size_t p = a.cols;
  std::vector<std::vector<double>> m(p, std::vector<double>(p + 1, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < p; ++j) {
      for (std::size_t k = 0; k < p; ++k) m[j][k] += a(i, j) * a(i, k);
      m[j][p] += a(i, j) * b[i];
    }
  for (std::size_t col = 0; col < p; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < p; ++r)
      if (std::fabs(m[r][col]) > std::fabs(m[pivot][col])) pivot = r;
    std::swap(m[col], m[pivot]);
    if (m[col][col] == 0.0) throw std::runtime_error("singular normal system");
    for (std::size_t r = 0; r < p; ++r) {
      if (r == col) continue;
      const double factor = m[r][col] / m[col][col];
      for (std::size_t k = col; k <= p; ++k) m[r][k] -= factor * m[col][k];
    }
  }
  std::vector<double> x(p);
  for (std::size_t j = 0; j < p; ++j) x[j] = m[j][p] / m[j][j];
  return x;
}

struct StumpScan {
  bool found = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  double sse = std::numeric_limits<double>::infinity();
};

// Exhaustive best depth-1 split: every feature, every midpoint between
// adjacent distinct values, SSE recomputed from scratch per candidate.
inline StumpScan best_stump(const qhuber::Matrix& x,
                            std::span<const double> targets,
                            std::size_t min_leaf) {
  StumpScan best;
  const std::size_t n = x.rows;
  for (std::size_t j = 0; j < x.cols; ++j) {
    std::vector<double> values(n);
    for (std::size_t i = 0; i < n; ++i) values[i] = x(i, j);
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t k = 0; k + 1 < n; ++k) {
      if (sorted[k] == sorted[k + 1]) continue;
      const double thr = 0.5 * (sorted[k] + sorted[k + 1]);
      std::vector<double> left, right;
      for (std::size_t i = 0; i < n; ++i)
        (values[i] <= thr ? left : right).push_back(targets[i]);
      if (left.size() < min_leaf || right.size() < min_leaf) continue;
      const auto sse_of = [](const std::vector<double>& v) {
        double mean = 0.0;
        for (double t : v) mean += t;
        mean /= static_cast<double>(v.size());
        double sse = 0.0;
        for (double t : v) sse += (t - mean) * (t - mean);
        return sse;
      };
      const double sse = sse_of(left) + sse_of(right);
      if (sse < best.sse) {
        best = {true, j, thr, sse};
      }
    }
  }
  return best;
}

// Kolmogorov-Smirnov distance between a sample and a reference CDF.
inline double ks_statistic(std::vector<double> samples,
                           const std::function<double(double)>& cdf) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max(d, std::fabs(f - static_cast<double>(i + 1) / n));
    d = std::max(d, std::fabs(f - static_cast<double>(i) / n));
  }
  return d;
}

}  // namespace oracles
