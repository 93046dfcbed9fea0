#include "elastoref/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "elastoref/error.hpp"

namespace elastoref {

void RoiSpec::validate(const GridGeometry& geometry) const {
  if (rows == 0 || cols == 0 || rows * cols < 2) {
    throw DimensionError("ROI must hold at least 2 pixels, got " + std::to_string(rows) + "x" +
                         std::to_string(cols));
  }
  if (row_start >= geometry.rows || col_start >= geometry.cols || rows > geometry.rows - row_start ||
      cols > geometry.cols - col_start) {
    throw DimensionError("ROI " + std::to_string(row_start) + "," + std::to_string(col_start) + "," +
                         std::to_string(rows) + "," + std::to_string(cols) + " leaves the " +
                         std::to_string(geometry.rows) + "x" + std::to_string(geometry.cols) + " grid");
  }
}

RoiStats roi_stats(const Grid2D& g, const RoiSpec& roi) {
  roi.validate(g.geometry());
  // Welford accumulation in row-major order.
  double mean = 0.0;
  double m2 = 0.0;
  std::size_t n = 0;
  for (std::size_t i = roi.row_start; i < roi.row_start + roi.rows; ++i) {
    for (std::size_t j = roi.col_start; j < roi.col_start + roi.cols; ++j) {
      ++n;
      const double x = g(i, j);
      const double d = x - mean;
      mean += d / static_cast<double>(n);
      m2 += d * (x - mean);
    }
  }
  return {mean, std::sqrt(std::max(0.0, m2 / static_cast<double>(n))), n};
}

double cnr(const RoiStats& target, const RoiStats& background) {
  const double var = background.std * background.std + target.std * target.std;
  if (!(var > 0.0)) {
    throw DegenerateStatisticsError("CNR undefined: target and background standard deviations are both zero");
  }
  const double d = background.mean - target.mean;
  return std::sqrt(2.0 * d * d / var);
}

double sr(const RoiStats& target, const RoiStats& background) {
  if (background.mean == 0.0) throw DegenerateStatisticsError("SR undefined: background mean is zero");
  return target.mean / background.mean;
}

IncompressibilityResidual incompressibility_residual(const StrainPair& strains) {
  if (!(strains.axial.geometry() == strains.lateral.geometry())) {
    throw DimensionError("incompressibility_residual: strain grids have different geometries");
  }
  IncompressibilityResidual out{Grid2D(strains.geometry()), 0.0};
  const std::size_t rows = strains.geometry().rows;
  const std::size_t cols = strains.geometry().cols;
  double sq = 0.0;
  for (std::size_t i = 1; i + 1 < rows; ++i) {
    for (std::size_t j = 1; j + 1 < cols; ++j) {
      const double r = strains.axial(i, j) + 2.0 * strains.lateral(i, j);
      out.field(i, j) = r;
      sq += r * r;
    }
  }
  out.l2 = std::sqrt(sq / static_cast<double>((rows - 2) * (cols - 2)));
  return out;
}

std::size_t EprHistogram::total() const noexcept {
  return std::accumulate(counts.begin(), counts.end(), std::size_t{0});
}

EprHistogram epr_histogram(const EprField& epr, const FeasibilityBounds& bounds, std::size_t bins, double lo,
                           double hi) {
  bounds.validate();
  if (bins < 1) throw ParameterError("histogram needs at least one bin");
  if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi)) {
    throw ParameterError("histogram range needs lo < hi, got [" + std::to_string(lo) + ", " +
                         std::to_string(hi) + "]");
  }

  EprHistogram h;
  h.bin_edges.resize(bins + 1);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (std::size_t b = 0; b <= bins; ++b) h.bin_edges[b] = lo + width * static_cast<double>(b);
  h.bin_edges.back() = hi;
  h.counts.assign(bins, 0);

  auto v = epr.values.values();
  std::size_t counted = 0;
  std::size_t inside = 0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (!epr.degenerate.empty() && epr.degenerate[k] != 0) continue;
    ++counted;
    if (bounds.contains(v[k])) ++inside;
    const double x = std::clamp(v[k], lo, hi);
    auto b = static_cast<std::size_t>((x - lo) / width);
    b = std::min(b, bins - 1);
    // Keep the bin consistent with the stored edges.
    while (b > 0 && x < h.bin_edges[b]) --b;
    while (b + 1 < bins && x >= h.bin_edges[b + 1]) ++b;
    ++h.counts[b];
  }
  h.in_range_fraction = counted == 0 ? 0.0 : static_cast<double>(inside) / static_cast<double>(counted);
  return h;
}

}  // namespace elastoref
