#pragma once

#include <optional>
#include <string>
#include <vector>

#include "elastoref/epr.hpp"
#include "elastoref/grid.hpp"
#include "elastoref/stencil.hpp"

namespace elastoref {

/// Settings of the EPR-range clipper.
struct ClipperConfig {
  FeasibilityBounds bounds{};
  int iterations = 10;
  double epr_floor = kDefaultEprFloor;
  /// Stop once the largest lateral update (mm) drops below this value.
  std::optional<double> convergence_tol;
  /// Integrate `epr * e11` per column step as a bare recurrence, without
  /// spacing or sign. Off by default: the default integrates
  /// e22 = -epr * e11 times the lateral spacing.
  bool literal_integration = false;

  void validate() const;
};

enum class StencilMode {
  /// Lateral Laplacian plus the symmetric 4-point mixed partial of w_a / 4.
  corrected,
  /// W_a(i+1,j+1) - W_a(i-1,j) - W_a(i,j-1) + W_a(i-1,j-1), unscaled.
  paper_literal,
};

/// Settings of the incompressibility relaxation.
struct GuoConfig {
  int iterations = 100;
  double lambda1 = 0.1;  // momentum
  double lambda2 = 0.1;  // step
  double gaussian_sigma = 1.0;
  StencilMode stencil = StencilMode::corrected;
  /// Edge handling for the stencils and the per-iteration Gaussian.
  EdgeMode edge = EdgeMode::antisymmetric;
  /// Only used to fill the out-of-range column of the trace.
  FeasibilityBounds trace_bounds{};
  double trace_epr_floor = kDefaultEprFloor;

  void validate() const;
};

struct TraceRecord {
  std::string op;
  int iteration = 0;  // 1-based within the operator
  double out_of_range_fraction = 0.0;
  double residual_l2 = 0.0;
  double max_update = 0.0;  // mm
};

struct RefinementTrace {
  std::vector<TraceRecord> records;

  std::size_t size() const noexcept { return records.size(); }
  void append(const RefinementTrace& other);
};

struct RefinementResult {
  DisplacementField field;
  RefinementTrace trace;
};

enum class KnownOperator { clipper, guo };

/// Iteratively clamps EPR into the bounds and re-integrates the lateral
/// displacement column by column from the first column.
RefinementResult poisson_clipper(const DisplacementField& field, const ClipperConfig& cfg);

/// Jacobi relaxation of the lateral displacement towards e11 + 2 e22 = 0
/// with Gaussian smoothing after every step. Stencils work in index units.
RefinementResult guo_refine(const DisplacementField& field, const GuoConfig& cfg);

/// Runs the operators in `order` and concatenates their traces.
RefinementResult kpicture_refine(const DisplacementField& field, const ClipperConfig& clipper,
                                 const GuoConfig& guo,
                                 const std::vector<KnownOperator>& order = {KnownOperator::clipper,
                                                                             KnownOperator::guo});

const char* to_string(StencilMode mode) noexcept;
const char* to_string(KnownOperator op) noexcept;

}  // namespace elastoref
