#pragma once

#include <cstddef>
#include <vector>

#include "elastoref/epr.hpp"
#include "elastoref/grid.hpp"

namespace elastoref {

/// Rectangular region in index coordinates.
struct RoiSpec {
  std::size_t row_start = 0;
  std::size_t col_start = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;

  /// Throws DimensionError if the ROI leaves `geometry` or holds < 2 pixels.
  void validate(const GridGeometry& geometry) const;
};

struct RoiStats {
  double mean = 0.0;
  double std = 0.0;  // population
  std::size_t count = 0;
};

RoiStats roi_stats(const Grid2D& g, const RoiSpec& roi);

/// sqrt(2 (mean_b - mean_t)^2 / (std_b^2 + std_t^2)).
double cnr(const RoiStats& target, const RoiStats& background);

/// mean_t / mean_b.
double sr(const RoiStats& target, const RoiStats& background);

struct IncompressibilityResidual {
  /// e11 + 2 e22 on interior pixels, 0 on the border.
  Grid2D field;
  /// Root-mean-square over interior pixels.
  double l2 = 0.0;
};

IncompressibilityResidual incompressibility_residual(const StrainPair& strains);

struct EprHistogram {
  std::vector<double> bin_edges;  // bins + 1
  std::vector<std::size_t> counts;
  double in_range_fraction = 0.0;

  std::size_t total() const noexcept;
};

inline constexpr std::size_t kDefaultHistogramBins = 64;
inline constexpr double kDefaultHistogramLo = -0.5;
inline constexpr double kDefaultHistogramHi = 1.5;

/// Histogram of non-degenerate EPR values. Values outside [lo, hi] land in
/// the first or last bin.
EprHistogram epr_histogram(const EprField& epr, const FeasibilityBounds& bounds,
                           std::size_t bins = kDefaultHistogramBins, double lo = kDefaultHistogramLo,
                           double hi = kDefaultHistogramHi);

}  // namespace elastoref
