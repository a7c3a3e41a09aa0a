#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace qhuber {

// Dense row-major matrix, just enough for regression designs.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
  std::span<const double> row(std::size_t i) const {
    return {data.data() + i * cols, cols};
  }
};

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

// out = A x
void matvec(const Matrix& a, std::span<const double> x, std::span<double> out);
// out = A^T v
void matvec_transposed(const Matrix& a, std::span<const double> v,
                       std::span<double> out);

// Minimum-norm residual solution of min ||A x - b|| via Householder QR.
// Throws std::domain_error when A is rank deficient.
std::vector<double> qr_solve(const Matrix& a, std::span<const double> b);

}  // namespace qhuber
