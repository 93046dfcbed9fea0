#pragma once

#include <cstdint>
#include <vector>

#include "elastoref/grid.hpp"

namespace elastoref {

/// Accepted effective Poisson's ratio interval; membership is strict.
struct FeasibilityBounds {
  double v_min = 0.1;
  double v_max = 0.6;

  void validate() const;
  double midpoint() const noexcept { return 0.5 * (v_min + v_max); }
  bool contains(double v) const noexcept { return v_min < v && v < v_max; }
};

inline constexpr double kDefaultEprFloor = 1e-6;

/// Effective Poisson's ratio -e22/e11 per pixel.
struct EprField {
  Grid2D values;
  /// 1 where |e11| < floor; those pixels hold the bounds midpoint.
  std::vector<std::uint8_t> degenerate;
  double floor = kDefaultEprFloor;

  std::size_t degenerate_count() const noexcept;
};

/// Binary out-of-range indicator: 0 inside (v_min, v_max), 1 otherwise.
struct FeasibilityMask {
  Grid2D values;

  /// Mean of the mask over all pixels.
  double fraction() const noexcept;
  bool empty() const noexcept;
};

struct DataLoss {
  double l_vd = 0.0;
  /// Mean EPR over in-range, non-degenerate pixels.
  double mean_inrange_epr = 0.0;
};

struct PictureLossReport {
  double l_vd = 0.0;
  double l_vs = 0.0;
  double l_v = 0.0;
  double mean_inrange_epr = 0.0;
  double out_of_range_fraction = 0.0;
  double beta = 1.0;
  double lambda_vs = 1.0;
};

EprField compute_epr(const StrainPair& strains, double floor = kDefaultEprFloor,
                     const FeasibilityBounds& bounds = {});

FeasibilityMask feasibility_mask(const EprField& epr, const FeasibilityBounds& bounds);

/// Root-mean-square over all pixels of M * (e22 + <v> e11). The stop-gradient
/// on e11 has no effect in forward evaluation.
/// Throws DegenerateStatisticsError when no pixel is in range.
DataLoss picture_data_loss(const StrainPair& strains, const EprField& epr, const FeasibilityMask& mask,
                           const FeasibilityBounds& bounds);

/// mean|dv/da| + beta * mean|dv/dl|.
double epr_smoothness_loss(const EprField& epr, double beta);

PictureLossReport picture_loss(const StrainPair& strains, const FeasibilityBounds& bounds = {},
                               double beta = 1.0, double lambda_vs = 1.0,
                               double floor = kDefaultEprFloor);

}  // namespace elastoref
