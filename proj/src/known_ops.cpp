#include "elastoref/known_ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "elastoref/error.hpp"
#include "elastoref/metrics.hpp"
#include "elastoref/stencil.hpp"

namespace elastoref {
namespace {

TraceRecord make_record(const char* op, int iteration, const Grid2D& axial, const Grid2D& lateral,
                        const FeasibilityBounds& bounds, double floor, double max_update) {
  const StrainPair strains(gradient_axial(axial), gradient_lateral(lateral));
  const EprField epr = compute_epr(strains, floor, bounds);
  TraceRecord rec;
  rec.op = op;
  rec.iteration = iteration;
  rec.out_of_range_fraction = feasibility_mask(epr, bounds).fraction();
  rec.residual_l2 = incompressibility_residual(strains).l2;
  rec.max_update = max_update;
  return rec;
}

void require_refinable(const DisplacementField& field, const char* op) {
  if (!(field.axial.geometry() == field.lateral.geometry())) {
    throw DimensionError(std::string(op) + ": axial and lateral grids have different geometries");
  }
  if (field.geometry().rows < 3 || field.geometry().cols < 3) {
    throw DimensionError(std::string(op) + ": field must be at least 3x3");
  }
}

}  // namespace

void ClipperConfig::validate() const {
  bounds.validate();
  if (iterations < 1) throw ParameterError("clipper iterations must be >= 1, got " + std::to_string(iterations));
  if (!(epr_floor > 0.0) || !std::isfinite(epr_floor)) {
    throw ParameterError("clipper EPR floor must be positive, got " + std::to_string(epr_floor));
  }
  if (convergence_tol && !(*convergence_tol >= 0.0)) {
    throw ParameterError("clipper convergence tolerance must be >= 0");
  }
}

void GuoConfig::validate() const {
  if (iterations < 1) throw ParameterError("guo iterations must be >= 1, got " + std::to_string(iterations));
  if (!(lambda1 >= 0.0) || !std::isfinite(lambda1)) {
    throw ParameterError("guo lambda1 must be >= 0, got " + std::to_string(lambda1));
  }
  if (!(lambda2 >= 0.0) || !std::isfinite(lambda2)) {
    throw ParameterError("guo lambda2 must be >= 0, got " + std::to_string(lambda2));
  }
  if (!(gaussian_sigma >= 0.0) || !std::isfinite(gaussian_sigma)) {
    throw ParameterError("guo gaussian sigma must be >= 0, got " + std::to_string(gaussian_sigma));
  }
  trace_bounds.validate();
}

void RefinementTrace::append(const RefinementTrace& other) {
  records.insert(records.end(), other.records.begin(), other.records.end());
}

RefinementResult poisson_clipper(const DisplacementField& field, const ClipperConfig& cfg) {
  require_refinable(field, "poisson_clipper");
  cfg.validate();

  const GridGeometry& geo = field.geometry();
  const std::size_t rows = geo.rows;
  const std::size_t cols = geo.cols;
  const double dl = geo.lateral_spacing;

  const Grid2D e11 = gradient_axial(field.axial);
  std::vector<std::uint8_t> degenerate(e11.size());
  for (std::size_t k = 0; k < e11.size(); ++k) degenerate[k] = std::abs(e11.values()[k]) < cfg.epr_floor;
  if (std::all_of(degenerate.begin(), degenerate.end(), [](std::uint8_t d) { return d != 0; })) {
    throw DegenerateStatisticsError("poisson_clipper: axial strain is below the EPR floor " +
                                    std::to_string(cfg.epr_floor) + " everywhere");
  }

  RefinementResult result{field, {}};
  Grid2D& w = result.field.lateral;
  Grid2D next(geo);
  std::vector<double> step(cols);

  for (int q = 1; q <= cfg.iterations; ++q) {
    const Grid2D e22 = gradient_lateral(w);
    double max_update = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j) {
        const std::size_t k = i * cols + j;
        const double a = e11.values()[k];
        if (degenerate[k]) {
          // No axial evidence; keep the current lateral strain.
          step[j] = cfg.literal_integration ? e22(i, j) : e22(i, j) * dl;
          continue;
        }
        const double clipped = std::clamp(-e22(i, j) / a, cfg.bounds.v_min, cfg.bounds.v_max);
        step[j] = cfg.literal_integration ? clipped * a : -clipped * a * dl;
      }
      next(i, 0) = w(i, 0);
      for (std::size_t j = 1; j < cols; ++j) next(i, j) = next(i, j - 1) + step[j];
      for (std::size_t j = 0; j < cols; ++j) max_update = std::max(max_update, std::abs(next(i, j) - w(i, j)));
    }
    std::swap(w, next);
    result.trace.records.push_back(
        make_record("clipper", q, field.axial, w, cfg.bounds, cfg.epr_floor, max_update));
    if (cfg.convergence_tol && max_update < *cfg.convergence_tol) break;
  }
  return result;
}

RefinementResult guo_refine(const DisplacementField& field, const GuoConfig& cfg) {
  require_refinable(field, "guo_refine");
  cfg.validate();

  const GridGeometry& geo = field.geometry();
  const long rows = static_cast<long>(geo.rows);
  const long cols = static_cast<long>(geo.cols);
  const EdgeMode edge = cfg.edge;

  // The axial part of the stencil depends only on w_a, which never changes.
  Grid2D mixed(geo);
  {
    const Grid2D& a = field.axial;
    auto A = [&](long i, long j) { return sample_extended(a, i, j, edge); };
    for (long i = 0; i < rows; ++i) {
      for (long j = 0; j < cols; ++j) {
        double m = 0.0;
        if (cfg.stencil == StencilMode::corrected) {
          m = 0.25 * (A(i + 1, j + 1) - A(i + 1, j - 1) - A(i - 1, j + 1) + A(i - 1, j - 1));
        } else {
          m = A(i + 1, j + 1) - A(i - 1, j) - A(i, j - 1) + A(i - 1, j - 1);
        }
        mixed(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = m;
      }
    }
  }

  RefinementResult result{field, {}};
  Grid2D& w = result.field.lateral;
  Grid2D prev = w;
  Grid2D stepped(geo);

  for (int q = 1; q <= cfg.iterations; ++q) {
    for (long i = 0; i < rows; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      for (long j = 0; j < cols; ++j) {
        const auto uj = static_cast<std::size_t>(j);
        const double c = w(ui, uj);
        const double left = j > 0 ? w(ui, uj - 1) : sample_extended(w, i, j - 1, edge);
        const double right = j + 1 < cols ? w(ui, uj + 1) : sample_extended(w, i, j + 1, edge);
        double delta = left - 2.0 * c + right + mixed(ui, uj);
        if (q > 1) delta += cfg.lambda1 * (c - prev(ui, uj));
        stepped(ui, uj) = c + cfg.lambda2 * delta;
      }
    }
    Grid2D next = gaussian_filter(stepped, cfg.gaussian_sigma, edge);
    const double max_update = max_abs_difference(next, w);
    prev = std::move(w);
    w = std::move(next);
    result.trace.records.push_back(
        make_record("guo", q, field.axial, w, cfg.trace_bounds, cfg.trace_epr_floor, max_update));
  }
  return result;
}

RefinementResult kpicture_refine(const DisplacementField& field, const ClipperConfig& clipper,
                                 const GuoConfig& guo, const std::vector<KnownOperator>& order) {
  if (order.empty()) throw ParameterError("kpicture_refine: operator order is empty");
  clipper.validate();
  guo.validate();
  RefinementResult result{field, {}};
  for (KnownOperator op : order) {
    RefinementResult stage =
        op == KnownOperator::clipper ? poisson_clipper(result.field, clipper) : guo_refine(result.field, guo);
    result.field = std::move(stage.field);
    result.trace.append(stage.trace);
  }
  return result;
}

const char* to_string(StencilMode mode) noexcept {
  return mode == StencilMode::corrected ? "corrected" : "paper-literal";
}

const char* to_string(KnownOperator op) noexcept { return op == KnownOperator::clipper ? "clipper" : "guo"; }

}  // namespace elastoref
