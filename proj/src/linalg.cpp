#include "linalg.hpp"

#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace qhuber {

double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void matvec(const Matrix& a, std::span<const double> x, std::span<double> out) {
  assert(x.size() == a.cols && out.size() == a.rows);
  for (std::size_t i = 0; i < a.rows; ++i) out[i] = dot(a.row(i), x);
}

void matvec_transposed(const Matrix& a, std::span<const double> v,
                       std::span<double> out) {
  assert(v.size() == a.rows && out.size() == a.cols);
  for (std::size_t j = 0; j < a.cols; ++j) out[j] = 0.0;
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double vi = v[i];
    const double* row = a.data.data() + i * a.cols;
    for (std::size_t j = 0; j < a.cols; ++j) out[j] += vi * row[j];
  }
}

std::vector<double> qr_solve(const Matrix& a, std::span<const double> b) {
  const std::size_t n = a.rows;
  const std::size_t p = a.cols;
  if (p == 0 || n < p) throw std::domain_error("qr_solve needs rows >= cols >= 1");
  if (b.size() != n) throw std::domain_error("qr_solve rhs size mismatch");

  Matrix r = a;
  std::vector<double> rhs(b.begin(), b.end());
  std::vector<double> v(n);
  double max_diag = 0.0;
  const double eps = std::numeric_limits<double>::epsilon();

  for (std::size_t k = 0; k < p; ++k) {
    double norm_x = 0.0;
    for (std::size_t i = k; i < n; ++i) norm_x += r(i, k) * r(i, k);
    norm_x = std::sqrt(norm_x);
    if (norm_x <= eps * static_cast<double>(n) * std::max(max_diag, 1.0) ||
        norm_x == 0.0)
      throw std::domain_error("rank-deficient design matrix");

    const double alpha = r(k, k) >= 0.0 ? -norm_x : norm_x;
    v[k] = r(k, k) - alpha;
    for (std::size_t i = k + 1; i < n; ++i) v[i] = r(i, k);
    double vnorm2 = 0.0;
    for (std::size_t i = k; i < n; ++i) vnorm2 += v[i] * v[i];

    r(k, k) = alpha;
    for (std::size_t i = k + 1; i < n; ++i) r(i, k) = 0.0;
    if (vnorm2 > 0.0) {
      for (std::size_t j = k + 1; j < p; ++j) {
        double s = 0.0;
        for (std::size_t i = k; i < n; ++i) s += v[i] * r(i, j);
        s *= 2.0 / vnorm2;
        for (std::size_t i = k; i < n; ++i) r(i, j) -= s * v[i];
      }
      double s = 0.0;
      for (std::size_t i = k; i < n; ++i) s += v[i] * rhs[i];
      s *= 2.0 / vnorm2;
      for (std::size_t i = k; i < n; ++i) rhs[i] -= s * v[i];
    }
    max_diag = std::max(max_diag, std::fabs(alpha));
  }

  for (std::size_t k = 0; k < p; ++k)
    if (std::fabs(r(k, k)) <= eps * static_cast<double>(std::max(n, p)) * max_diag)
      throw std::domain_error("rank-deficient design matrix");

  std::vector<double> x(p, 0.0);
  for (std::size_t kk = p; kk-- > 0;) {
    double s = rhs[kk];
    for (std::size_t j = kk + 1; j < p; ++j) s -= r(kk, j) * x[j];
    x[kk] = s / r(kk, kk);
  }
  return x;
}

}  // namespace qhuber
