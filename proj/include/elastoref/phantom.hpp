#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "elastoref/grid.hpp"

namespace elastoref {

/// Circular region whose axial strain is scaled by `strain_contrast`.
struct Inclusion {
  double center_axial = 0.0;    // mm
  double center_lateral = 0.0;  // mm
  double radius = 1.0;          // mm
  double strain_contrast = 0.5;
  double edge_softness = 0.0;   // mm; width of the radial transition
};

struct PhantomSpec {
  GridGeometry geometry{256, 256, 0.0385, 0.15};
  double applied_axial_strain = 0.02;  // compression magnitude
  double poisson_ratio = 0.5;
  std::vector<Inclusion> inclusions;
  double noise_std_axial = 0.0;    // mm
  double noise_std_lateral = 0.0;  // mm
  std::uint64_t seed = 0;

  void validate() const;
};

struct Phantom {
  DisplacementField noisy;
  DisplacementField clean;
  StrainPair clean_strains;
};

/// Strain-prescribed phantom: e11 = -eps0 * m, e22 = -nu * e11, integrated
/// from w_a(0, :) = 0 and w_l(:, 0) = 0 with the trapezoid rule.
Phantom generate(const PhantomSpec& spec);

struct PerturbedField {
  DisplacementField field;
  /// Row-major indices of the pixels whose EPR was shifted, ascending.
  std::vector<std::size_t> indices;
};

/// Shifts the EPR of a random `fraction` of pixels by `magnitude` (signed)
/// and rebuilds the lateral displacement so that the central-difference
/// lateral strain carries the shift. The last column is not controlled.
PerturbedField perturb_epr(const DisplacementField& field, double fraction, double magnitude,
                           std::uint64_t seed);

}  // namespace elastoref
