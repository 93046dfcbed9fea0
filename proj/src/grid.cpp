#include "elastoref/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "elastoref/error.hpp"
#include "elastoref/stencil.hpp"

namespace elastoref {

void GridGeometry::validate() const {
  if (rows < 3 || cols < 3) {
    throw DimensionError("grid must be at least 3x3, got " + std::to_string(rows) + "x" +
                         std::to_string(cols));
  }
  if (!(std::isfinite(axial_spacing) && axial_spacing > 0.0)) {
    throw ParameterError("axial spacing must be positive and finite, got " + std::to_string(axial_spacing));
  }
  if (!(std::isfinite(lateral_spacing) && lateral_spacing > 0.0)) {
    throw ParameterError("lateral spacing must be positive and finite, got " +
                         std::to_string(lateral_spacing));
  }
}

Grid2D::Grid2D(const GridGeometry& geometry) : Grid2D(geometry, 0.0) {}

Grid2D::Grid2D(const GridGeometry& geometry, double fill) : geometry_(geometry) {
  geometry_.validate();
  if (!std::isfinite(fill)) throw ParameterError("grid fill value must be finite");
  values_.assign(geometry_.size(), fill);
}

Grid2D::Grid2D(const GridGeometry& geometry, std::vector<double> values)
    : geometry_(geometry), values_(std::move(values)) {
  geometry_.validate();
  if (values_.size() != geometry_.size()) {
    throw DimensionError("grid holds " + std::to_string(values_.size()) + " values, geometry needs " +
                         std::to_string(geometry_.size()));
  }
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (!std::isfinite(values_[k])) {
      throw ParameterError("non-finite value at (" + std::to_string(k / geometry_.cols) + ", " +
                           std::to_string(k % geometry_.cols) + ")");
    }
  }
}

bool Grid2D::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double Grid2D::min() const {
  if (values_.empty()) throw DimensionError("min of an empty grid");
  return *std::min_element(values_.begin(), values_.end());
}

double Grid2D::max() const {
  if (values_.empty()) throw DimensionError("max of an empty grid");
  return *std::max_element(values_.begin(), values_.end());
}

Grid2D Grid2D::transposed() const {
  Grid2D out(geometry_.transposed());
  for (std::size_t i = 0; i < rows(); ++i)
    for (std::size_t j = 0; j < cols(); ++j) out(j, i) = (*this)(i, j);
  return out;
}

DisplacementField::DisplacementField(Grid2D axial_mm, Grid2D lateral_mm)
    : axial(std::move(axial_mm)), lateral(std::move(lateral_mm)) {
  if (!(axial.geometry() == lateral.geometry())) {
    throw DimensionError("axial and lateral displacement grids have different geometries");
  }
}

StrainPair::StrainPair(Grid2D e11, Grid2D e22) : axial(std::move(e11)), lateral(std::move(e22)) {
  if (!(axial.geometry() == lateral.geometry())) {
    throw DimensionError("axial and lateral strain grids have different geometries");
  }
}

StrainPair StrainPair::transposed() const { return {axial.transposed(), lateral.transposed()}; }

StrainPair compute_strains(const DisplacementField& field) {
  return {gradient_axial(field.axial), gradient_lateral(field.lateral)};
}

double max_abs_difference(const Grid2D& a, const Grid2D& b) {
  if (!(a.geometry() == b.geometry())) throw DimensionError("max_abs_difference: geometry mismatch");
  double worst = 0.0;
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t k = 0; k < av.size(); ++k) worst = std::max(worst, std::abs(av[k] - bv[k]));
  return worst;
}

}  // namespace elastoref
