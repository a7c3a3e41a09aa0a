#pragma once

#include <span>
#include <string>
#include <vector>

#include "rng.hpp"
#include "varpro_solver.hpp"

namespace qhuber {

// Additive noise description: Laplace magnitude scale plus the fraction of
// samples whose noise is forced positive (the rest are forced negative).
struct NoiseSpec {
  double sigma = 1.0;
  double pos_fraction = 0.5;
};

void validate_noise_spec(const NoiseSpec& spec);

// Inverse CDF of the symmetric Laplace distribution with scale sigma;
// u must lie strictly inside (0, 1).
double laplace_inverse_cdf(double u, double sigma);

// n draws with Laplace magnitudes and deterministic sign counts: exactly
// round(n * pos_fraction) entries are positive, placed uniformly at random.
// sigma = 0 yields all zeros without consuming randomness.
std::vector<double> sample_sign_mixed_laplace(Rng& rng, std::size_t n,
                                              const NoiseSpec& spec);

// Synthetic regression instance y = A x_true + noise with standard normal
// design entries.
struct LinearDemo {
  AffineModel model;
  std::vector<double> x_true;
};
LinearDemo gen_linear_demo(Rng& rng, std::size_t n,
                           std::span<const double> x_true,
                           const NoiseSpec& noise);

// Tabular data: feature columns plus one response column (last in the file).
struct Dataset {
  Matrix features;
  std::vector<double> response;
  std::vector<std::string> feature_names;
  std::string response_name;

  std::size_t rows() const { return features.rows; }
  std::size_t cols() const { return features.cols; }
};

// Comma-separated with a header row; every value must parse as a finite
// double.  Malformed rows raise ParseError naming the 1-based row/column.
Dataset load_csv(const std::string& path);

// Writes with %.17g so a reload reproduces the exact doubles.
void save_csv(const Dataset& ds, const std::string& path);

// v' = scale * v + offset
struct AffineMap {
  double scale = 1.0;
  double offset = 0.0;
};
double apply(const AffineMap& m, double v);

// Per-column affine rescale onto [-1, 1] (constant columns collapse to 0),
// applied to features and response alike.
struct RescaledDataset {
  Dataset data;
  std::vector<AffineMap> feature_maps;
  AffineMap response_map;
};
RescaledDataset rescale(const Dataset& ds);

// Fisher-Yates shuffle, first floor(n * train_fraction) rows become the train
// set.  Both parts must end up nonempty.
struct SplitResult {
  Dataset train;
  Dataset validation;
};
SplitResult split(const Dataset& ds, double train_fraction, Rng& rng);

}  // namespace qhuber
