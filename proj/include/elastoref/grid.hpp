#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace elastoref {

/// Sampling layout shared by every field. Rows run along the axial
/// direction (index i), columns along the lateral direction (index j).
struct GridGeometry {
  std::size_t rows = 0;
  std::size_t cols = 0;
  double axial_spacing = 1.0;    // mm per row
  double lateral_spacing = 1.0;  // mm per column

  /// Throws DimensionError for fewer than 3 rows/cols, ParameterError for
  /// non-positive or non-finite spacings.
  void validate() const;

  std::size_t size() const noexcept { return rows * cols; }

  /// Geometry of the transposed grid (rows/cols and spacings swapped).
  GridGeometry transposed() const noexcept { return {cols, rows, lateral_spacing, axial_spacing}; }

  friend bool operator==(const GridGeometry&, const GridGeometry&) = default;
};

/// Row-major scalar field.
class Grid2D {
public:
  Grid2D() = default;
  /// Zero-filled grid.
  explicit Grid2D(const GridGeometry& geometry);
  Grid2D(const GridGeometry& geometry, double fill);
  /// Takes ownership of `values`; the length must be rows*cols and every
  /// value finite.
  Grid2D(const GridGeometry& geometry, std::vector<double> values);

  const GridGeometry& geometry() const noexcept { return geometry_; }
  std::size_t rows() const noexcept { return geometry_.rows; }
  std::size_t cols() const noexcept { return geometry_.cols; }
  std::size_t size() const noexcept { return values_.size(); }

  double& operator()(std::size_t i, std::size_t j) { return values_[i * geometry_.cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * geometry_.cols + j]; }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  std::span<double> row(std::size_t i) { return {values_.data() + i * geometry_.cols, geometry_.cols}; }
  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * geometry_.cols, geometry_.cols};
  }

  bool all_finite() const noexcept;
  double min() const;
  double max() const;

  Grid2D transposed() const;

  friend bool operator==(const Grid2D&, const Grid2D&) = default;

private:
  GridGeometry geometry_{};
  std::vector<double> values_;
};

/// Axial (w_a) and lateral (w_l) displacement in mm on one geometry.
struct DisplacementField {
  Grid2D axial;
  Grid2D lateral;

  DisplacementField() = default;
  DisplacementField(Grid2D axial_mm, Grid2D lateral_mm);

  const GridGeometry& geometry() const noexcept { return axial.geometry(); }
};

/// Axial strain e11 and lateral strain e22 on one geometry.
struct StrainPair {
  Grid2D axial;
  Grid2D lateral;

  StrainPair() = default;
  StrainPair(Grid2D e11, Grid2D e22);

  const GridGeometry& geometry() const noexcept { return axial.geometry(); }
  StrainPair transposed() const;
};

/// e11 = d(w_a)/da and e22 = d(w_l)/dl.
StrainPair compute_strains(const DisplacementField& field);

double max_abs_difference(const Grid2D& a, const Grid2D& b);

}  // namespace elastoref
