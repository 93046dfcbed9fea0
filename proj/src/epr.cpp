#include "elastoref/epr.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "elastoref/error.hpp"
#include "elastoref/stencil.hpp"

namespace elastoref {

void FeasibilityBounds::validate() const {
  if (!(std::isfinite(v_min) && std::isfinite(v_max) && 0.0 <= v_min && v_min < v_max)) {
    throw ParameterError("feasibility bounds need 0 <= v_min < v_max, got (" + std::to_string(v_min) + ", " +
                         std::to_string(v_max) + ")");
  }
}

std::size_t EprField::degenerate_count() const noexcept {
  return static_cast<std::size_t>(std::count(degenerate.begin(), degenerate.end(), std::uint8_t{1}));
}

double FeasibilityMask::fraction() const noexcept {
  auto v = values.values();
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

bool FeasibilityMask::empty() const noexcept {
  auto v = values.values();
  return std::all_of(v.begin(), v.end(), [](double m) { return m == 0.0; });
}

EprField compute_epr(const StrainPair& strains, double floor, const FeasibilityBounds& bounds) {
  if (!(strains.axial.geometry() == strains.lateral.geometry())) {
    throw DimensionError("compute_epr: strain grids have different geometries");
  }
  if (!(floor > 0.0) || !std::isfinite(floor)) {
    throw ParameterError("EPR floor must be positive, got " + std::to_string(floor));
  }
  bounds.validate();

  EprField epr{Grid2D(strains.geometry()), std::vector<std::uint8_t>(strains.axial.size(), 0), floor};
  auto e11 = strains.axial.values();
  auto e22 = strains.lateral.values();
  auto out = epr.values.values();
  const double mid = bounds.midpoint();
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (std::abs(e11[k]) < floor) {
      out[k] = mid;
      epr.degenerate[k] = 1;
    } else {
      out[k] = -e22[k] / e11[k];
    }
  }
  return epr;
}

FeasibilityMask feasibility_mask(const EprField& epr, const FeasibilityBounds& bounds) {
  bounds.validate();
  FeasibilityMask mask{Grid2D(epr.values.geometry())};
  auto v = epr.values.values();
  auto m = mask.values.values();
  for (std::size_t k = 0; k < v.size(); ++k) {
    const bool degenerate = !epr.degenerate.empty() && epr.degenerate[k] != 0;
    m[k] = (degenerate || bounds.contains(v[k])) ? 0.0 : 1.0;
  }
  return mask;
}

DataLoss picture_data_loss(const StrainPair& strains, const EprField& epr, const FeasibilityMask& mask,
                           const FeasibilityBounds& bounds) {
  const auto& geo = strains.geometry();
  if (!(strains.lateral.geometry() == geo && epr.values.geometry() == geo && mask.values.geometry() == geo)) {
    throw DimensionError("picture_data_loss: inputs have different geometries");
  }
  bounds.validate();

  auto v = epr.values.values();
  auto m = mask.values.values();
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    const bool degenerate = !epr.degenerate.empty() && epr.degenerate[k] != 0;
    if (m[k] == 0.0 && !degenerate) {
      sum += v[k];
      ++n;
    }
  }
  if (n == 0) {
    throw DegenerateStatisticsError(
        "picture_data_loss: no in-range EPR pixel; use the bounds midpoint " +
        std::to_string(bounds.midpoint()) + " as the mean EPR instead");
  }
  const double mean_epr = sum / static_cast<double>(n);

  auto e11 = strains.axial.values();
  auto e22 = strains.lateral.values();
  double sq = 0.0;
  for (std::size_t k = 0; k < m.size(); ++k) {
    const double r = m[k] * (e22[k] + mean_epr * e11[k]);
    sq += r * r;
  }
  return {std::sqrt(sq / static_cast<double>(m.size())), mean_epr};
}

double epr_smoothness_loss(const EprField& epr, double beta) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw ParameterError("smoothness weight beta must be >= 0, got " + std::to_string(beta));
  }
  const Grid2D da = gradient_axial(epr.values);
  const Grid2D dl = gradient_lateral(epr.values);
  double sa = 0.0;
  double sl = 0.0;
  for (double g : da.values()) sa += std::abs(g);
  for (double g : dl.values()) sl += std::abs(g);
  const double n = static_cast<double>(epr.values.size());
  return sa / n + beta * (sl / n);
}

PictureLossReport picture_loss(const StrainPair& strains, const FeasibilityBounds& bounds, double beta,
                               double lambda_vs, double floor) {
  if (!(lambda_vs >= 0.0) || !std::isfinite(lambda_vs)) {
    throw ParameterError("smoothness loss weight lambda_vs must be >= 0, got " + std::to_string(lambda_vs));
  }
  const EprField epr = compute_epr(strains, floor, bounds);
  const FeasibilityMask mask = feasibility_mask(epr, bounds);
  const DataLoss data = picture_data_loss(strains, epr, mask, bounds);

  PictureLossReport report;
  report.l_vd = data.l_vd;
  report.l_vs = epr_smoothness_loss(epr, beta);
  report.l_v = report.l_vd + lambda_vs * report.l_vs;
  report.mean_inrange_epr = data.mean_inrange_epr;
  report.out_of_range_fraction = mask.fraction();
  report.beta = beta;
  report.lambda_vs = lambda_vs;
  return report;
}

}  // namespace elastoref
