#include "elastoref/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "elastoref/error.hpp"
#include "elastoref/stencil.hpp"
#include "random.hpp"

namespace elastoref {
namespace {

double smoothstep(double x) {
  x = std::clamp(x, 0.0, 1.0);
  return x * x * (3.0 - 2.0 * x);
}

// Inclusion weight in [0, 1]: 1 inside, 0 outside, smooth across
// [radius - softness/2, radius + softness/2].
double inclusion_weight(const Inclusion& inc, double a, double l) {
  const double d = std::hypot(a - inc.center_axial, l - inc.center_lateral);
  if (inc.edge_softness <= 0.0) return d <= inc.radius ? 1.0 : 0.0;
  return smoothstep((inc.radius + 0.5 * inc.edge_softness - d) / inc.edge_softness);
}

void add_noise(Grid2D& g, double sigma, detail::PortableRng& rng) {
  if (sigma == 0.0) return;
  for (double& v : g.values()) v += sigma * rng.normal();
}

}  // namespace

void PhantomSpec::validate() const {
  geometry.validate();
  auto finite_nonneg = [](double v) { return std::isfinite(v) && v >= 0.0; };
  if (!(std::isfinite(applied_axial_strain) && applied_axial_strain > 0.0)) {
    throw ParameterError("applied axial strain must be > 0, got " + std::to_string(applied_axial_strain));
  }
  if (!(poisson_ratio >= 0.0 && poisson_ratio <= 0.5)) {
    throw ParameterError("poisson ratio must lie in [0, 0.5], got " + std::to_string(poisson_ratio));
  }
  if (!finite_nonneg(noise_std_axial) || !finite_nonneg(noise_std_lateral)) {
    throw ParameterError("noise standard deviations must be >= 0");
  }
  const double depth = static_cast<double>(geometry.rows - 1) * geometry.axial_spacing;
  const double width = static_cast<double>(geometry.cols - 1) * geometry.lateral_spacing;
  for (std::size_t k = 0; k < inclusions.size(); ++k) {
    const Inclusion& inc = inclusions[k];
    const std::string name = "inclusion " + std::to_string(k);
    if (!(std::isfinite(inc.strain_contrast) && inc.strain_contrast > 0.0)) {
      throw ParameterError(name + ": strain contrast must be > 0");
    }
    if (!(std::isfinite(inc.radius) && inc.radius > 0.0) || !finite_nonneg(inc.edge_softness)) {
      throw ParameterError(name + ": radius must be > 0 and edge softness >= 0");
    }
    if (inc.center_axial - inc.radius < 0.0 || inc.center_axial + inc.radius > depth ||
        inc.center_lateral - inc.radius < 0.0 || inc.center_lateral + inc.radius > width) {
      throw ParameterError(name + ": does not fit inside the " + std::to_string(depth) + " x " +
                           std::to_string(width) + " mm field of view");
    }
  }
}

Phantom generate(const PhantomSpec& spec) {
  spec.validate();
  const GridGeometry& geo = spec.geometry;
  const std::size_t rows = geo.rows;
  const std::size_t cols = geo.cols;
  const double da = geo.axial_spacing;
  const double dl = geo.lateral_spacing;

  Grid2D e11(geo);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const double a = static_cast<double>(i) * da;
      const double l = static_cast<double>(j) * dl;
      double m = 1.0;
      for (const Inclusion& inc : spec.inclusions) m *= 1.0 + (inc.strain_contrast - 1.0) * inclusion_weight(inc, a, l);
      e11(i, j) = -spec.applied_axial_strain * m;
    }
  }
  Grid2D e22(geo);
  for (std::size_t k = 0; k < e11.size(); ++k) e22.values()[k] = -spec.poisson_ratio * e11.values()[k];

  Grid2D wa(geo);
  for (std::size_t i = 1; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) wa(i, j) = wa(i - 1, j) + 0.5 * (e11(i - 1, j) + e11(i, j)) * da;
  Grid2D wl(geo);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 1; j < cols; ++j) wl(i, j) = wl(i, j - 1) + 0.5 * (e22(i, j - 1) + e22(i, j)) * dl;

  Phantom out{DisplacementField(wa, wl), DisplacementField(wa, wl), StrainPair(std::move(e11), std::move(e22))};
  detail::PortableRng rng(spec.seed);
  add_noise(out.noisy.axial, spec.noise_std_axial, rng);
  add_noise(out.noisy.lateral, spec.noise_std_lateral, rng);
  return out;
}

PerturbedField perturb_epr(const DisplacementField& field, double fraction, double magnitude, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw ParameterError("perturbation fraction must lie in [0, 1], got " + std::to_string(fraction));
  }
  if (!std::isfinite(magnitude)) throw ParameterError("perturbation magnitude must be finite");

  const GridGeometry& geo = field.geometry();
  const std::size_t rows = geo.rows;
  const std::size_t cols = geo.cols;
  const double dl = geo.lateral_spacing;

  // Candidates exclude the last column, whose one-sided strain cannot be set
  // independently once the interior is fixed.
  const std::size_t candidates = rows * (cols - 1);
  const auto wanted = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(rows * cols)));
  const std::size_t n = std::min(wanted, candidates);

  std::vector<std::size_t> pool(candidates);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  detail::PortableRng rng(seed);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t pick = k + static_cast<std::size_t>(rng.below(candidates - k));
    std::swap(pool[k], pool[pick]);
  }
  pool.resize(n);
  std::sort(pool.begin(), pool.end());

  PerturbedField out{field, {}};
  out.indices.reserve(n);
  const Grid2D e11 = gradient_axial(field.axial);

  // Central differences couple columns of equal parity: a strain change at
  // column j moves w[j+1], w[j+3], ... while the first column's one-sided
  // strain moves w[1], w[3], ....
  std::vector<double> seed_step(cols);
  std::vector<double> offset(cols);
  std::size_t next = 0;
  for (std::size_t i = 0; i < rows && next < pool.size(); ++i) {
    std::fill(seed_step.begin(), seed_step.end(), 0.0);
    bool touched = false;
    while (next < pool.size() && pool[next] / (cols - 1) == i) {
      const std::size_t j = pool[next] % (cols - 1);
      const double shift = -magnitude * e11(i, j);
      seed_step[j + 1] += (j == 0 ? 1.0 : 2.0) * dl * shift;
      out.indices.push_back(i * cols + j);
      touched = true;
      ++next;
    }
    if (!touched) continue;
    offset[0] = 0.0;
    offset[1] = seed_step[1];
    for (std::size_t c = 2; c < cols; ++c) offset[c] = offset[c - 2] + seed_step[c];
    for (std::size_t c = 0; c < cols; ++c)
      if (offset[c] != 0.0) out.field.lateral(i, c) += offset[c];
  }
  return out;
}

}  // namespace elastoref
