#pragma once

#include <vector>

#include "elastoref/grid.hpp"

namespace elastoref {

/// How samples beyond the grid edge are synthesised.
enum class EdgeMode {
  /// Clamp to the nearest edge sample.
  replicate,
  /// Point reflection through the edge sample: g[-k] = 2 g[0] - g[k].
  /// Affine profiles continue unchanged across the edge.
  antisymmetric,
};

/// Derivative along the rows (axial), per mm. Central differences inside,
/// first-order one-sided differences on the first and last row.
Grid2D gradient_axial(const Grid2D& g);

/// Derivative along the columns (lateral), per mm.
Grid2D gradient_lateral(const Grid2D& g);

/// Normalised 1-D Gaussian weights, radius ceil(3 sigma). sigma == 0 gives {1}.
std::vector<double> gaussian_kernel(double sigma);

/// Separable Gaussian smoothing with `sigma` in samples along both axes.
/// sigma == 0 returns the input unchanged.
Grid2D gaussian_filter(const Grid2D& g, double sigma, EdgeMode edge = EdgeMode::replicate);

/// Index-space sample at (i, j) with out-of-range indices resolved by `edge`.
/// Used by stencils that reach one sample past the border.
double sample_extended(const Grid2D& g, long i, long j, EdgeMode edge);

}  // namespace elastoref
