#pragma once

#include <stdexcept>

namespace qhuber {

// Operation is well formed but deliberately not provided, e.g. asking for the
// residual derivative of the non-smooth kappa = 0 loss.
struct UnsupportedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input file; message carries a row/column location.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Filesystem trouble (missing file, unwritable path).
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An iterative routine ran out of iterations inside a caller that cannot
// carry a partial result.
struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace qhuber
