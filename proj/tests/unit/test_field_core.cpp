#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "elastoref/error.hpp"
#include "elastoref/grid.hpp"
#include "elastoref/stencil.hpp"
#include "test_support.hpp"

using namespace elastoref;
using elastoref::testing::grid_from;
using elastoref::testing::random_grid;

namespace {

// Per-pixel stencil evaluation, written independently of the library loops.
double oracle_axial(const Grid2D& g, std::size_t i, std::size_t j) {
  const double h = g.geometry().axial_spacing;
  const std::size_t n = g.rows();
  if (i == 0) return (g(1, j) - g(0, j)) / h;
  if (i == n - 1) return (g(n - 1, j) - g(n - 2, j)) / h;
  return (g(i + 1, j) - g(i - 1, j)) / (2 * h);
}

double oracle_lateral(const Grid2D& g, std::size_t i, std::size_t j) {
  const double h = g.geometry().lateral_spacing;
  const std::size_t n = g.cols();
  if (j == 0) return (g(i, 1) - g(i, 0)) / h;
  if (j == n - 1) return (g(i, n - 1) - g(i, n - 2)) / h;
  return (g(i, j + 1) - g(i, j - 1)) / (2 * h);
}

// Dense 2-D convolution with the outer-product kernel and clamped indices.
Grid2D oracle_gaussian(const Grid2D& g, double sigma) {
  const long r = static_cast<long>(std::ceil(3 * sigma));
  std::vector<double> k1;
  double s = 0;
  for (long t = -r; t <= r; ++t) {
    k1.push_back(std::exp(-(t * t) / (2 * sigma * sigma)));
    s += k1.back();
  }
  for (double& w : k1) w /= s;
  const long rows = static_cast<long>(g.rows());
  const long cols = static_cast<long>(g.cols());
  Grid2D out(g.geometry());
  for (long i = 0; i < rows; ++i) {
    for (long j = 0; j < cols; ++j) {
      double acc = 0;
      for (long a = -r; a <= r; ++a) {
        for (long b = -r; b <= r; ++b) {
          const long ii = std::clamp(i + a, 0L, rows - 1);
          const long jj = std::clamp(j + b, 0L, cols - 1);
          acc += k1[a + r] * k1[b + r] * g(ii, jj);
        }
      }
      out(i, j) = acc;
    }
  }
  return out;
}

}  // namespace

TEST_CASE("geometry invariants") {
  CHECK_THROWS_AS(GridGeometry({2, 5, 1, 1}).validate(), DimensionError);
  CHECK_THROWS_AS(GridGeometry({5, 2, 1, 1}).validate(), DimensionError);
  CHECK_THROWS_AS(GridGeometry({5, 5, 0, 1}).validate(), ParameterError);
  CHECK_THROWS_AS(GridGeometry({5, 5, 1, -1}).validate(), ParameterError);
  CHECK_THROWS_AS(GridGeometry({5, 5, INFINITY, 1}).validate(), ParameterError);
  CHECK_NOTHROW(GridGeometry({3, 3, 0.1, 0.2}).validate());
}

TEST_CASE("grid construction rejects wrong length and non-finite values") {
  const GridGeometry geo{3, 4, 1, 1};
  CHECK_THROWS_AS(Grid2D(geo, std::vector<double>(11)), DimensionError);
  std::vector<double> v(12, 0.0);
  v[5] = NAN;
  CHECK_THROWS_AS(Grid2D(geo, v), ParameterError);
  CHECK_THROWS_AS(DisplacementField(Grid2D(geo), Grid2D(GridGeometry{3, 4, 1, 2})), DimensionError);
}

TEST_CASE("gradients of a constant grid vanish") {
  const Grid2D g(GridGeometry{6, 7, 0.3, 0.7}, 5.0);
  const Grid2D ga = gradient_axial(g);
  const Grid2D gl = gradient_lateral(g);
  for (double v : ga.values()) CHECK(v == 0.0);
  for (double v : gl.values()) CHECK(v == 0.0);
}

TEST_CASE("gradients are exact on affine fields") {
  const GridGeometry geo{9, 11, 0.0385, 0.15};
  const Grid2D ax = grid_from(geo, [&](auto i, auto) { return 0.1 * i * geo.axial_spacing; });
  const Grid2D ga = gradient_axial(ax);
  for (double v : ga.values()) CHECK(v == doctest::Approx(0.1).epsilon(1e-12));
  const Grid2D lat = grid_from(geo, [&](auto, auto j) { return -0.02 * j * geo.lateral_spacing; });
  const Grid2D gl = gradient_lateral(lat);
  for (double v : gl.values()) CHECK(v == doctest::Approx(-0.02).epsilon(1e-12));
}

TEST_CASE("gradients match the per-pixel stencil oracle") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Grid2D g = random_grid(8, 8, seed, -1, 1, 0.25, 0.4);
    const Grid2D ga = gradient_axial(g);
    const Grid2D gl = gradient_lateral(g);
    for (std::size_t i = 0; i < 8; ++i) {
      for (std::size_t j = 0; j < 8; ++j) {
        CHECK(elastoref::testing::rel_close(ga(i, j), oracle_axial(g, i, j), 1e-12));
        CHECK(elastoref::testing::rel_close(gl(i, j), oracle_lateral(g, i, j), 1e-12));
      }
    }
  }
}

TEST_CASE("gradients are linear") {
  const Grid2D f = random_grid(10, 12, 7);
  const Grid2D g = random_grid(10, 12, 8);
  const double alpha = 1.7;
  const double beta = -0.3;
  Grid2D comb(f.geometry());
  for (std::size_t k = 0; k < comb.size(); ++k) comb.values()[k] = alpha * f.values()[k] + beta * g.values()[k];
  for (auto op : {&gradient_axial, &gradient_lateral}) {
    const Grid2D lhs = op(comb);
    const Grid2D fa = op(f);
    const Grid2D ga = op(g);
    for (std::size_t k = 0; k < lhs.size(); ++k) {
      CHECK(std::abs(lhs.values()[k] - (alpha * fa.values()[k] + beta * ga.values()[k])) <= 1e-12);
    }
  }
}

TEST_CASE("gaussian kernel") {
  CHECK(gaussian_kernel(0.0) == std::vector<double>{1.0});
  const auto k = gaussian_kernel(1.0);
  CHECK(k.size() == 7);
  double s = 0;
  for (double w : k) s += w;
  CHECK(s == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(gaussian_kernel(0.4).size() == 5);  // ceil(1.2) = 2
  CHECK_THROWS_AS(gaussian_kernel(-0.1), ParameterError);
  CHECK_THROWS_AS(gaussian_filter(random_grid(5, 5, 1), -1.0), ParameterError);
}

TEST_CASE("gaussian sigma zero is the identity") {
  const Grid2D g = random_grid(6, 9, 3);
  CHECK(gaussian_filter(g, 0.0) == g);
  CHECK(gaussian_filter(g, 0.0, EdgeMode::antisymmetric) == g);
}

TEST_CASE("gaussian preserves constants") {
  const Grid2D g(GridGeometry{10, 13, 1, 1}, 2.0);
  for (EdgeMode e : {EdgeMode::replicate, EdgeMode::antisymmetric}) {
    for (double v : gaussian_filter(g, 1.5, e).values()) CHECK(std::abs(v - 2.0) <= 1e-12);
  }
}

TEST_CASE("gaussian impulse response matches dense 2-D convolution") {
  Grid2D g(GridGeometry{9, 9, 1, 1});
  g(4, 4) = 1.0;
  const Grid2D out = gaussian_filter(g, 1.0);
  const Grid2D want = oracle_gaussian(g, 1.0);
  const auto k = gaussian_kernel(1.0);
  for (std::size_t i = 0; i < 9; ++i) {
    for (std::size_t j = 0; j < 9; ++j) {
      CHECK(std::abs(out(i, j) - want(i, j)) <= 1e-12);
      const long di = static_cast<long>(i) - 4 + 3;
      const long dj = static_cast<long>(j) - 4 + 3;
      if (di >= 0 && di < 7 && dj >= 0 && dj < 7) CHECK(std::abs(out(i, j) - k[di] * k[dj]) <= 1e-12);
    }
  }
}

TEST_CASE("gaussian matches dense convolution on random grids near the edges") {
  const Grid2D g = random_grid(7, 12, 11);
  const Grid2D out = gaussian_filter(g, 1.3);
  const Grid2D want = oracle_gaussian(g, 1.3);
  CHECK(max_abs_difference(out, want) <= 1e-12);
}

TEST_CASE("gaussian commutes with transposition") {
  const Grid2D g = random_grid(11, 8, 21, -1, 1, 0.2, 0.5);
  for (EdgeMode e : {EdgeMode::replicate, EdgeMode::antisymmetric}) {
    const Grid2D a = gaussian_filter(g, 1.2, e).transposed();
    const Grid2D b = gaussian_filter(g.transposed(), 1.2, e);
    CHECK(a.geometry() == b.geometry());
    CHECK(max_abs_difference(a, b) <= 1e-12);
  }
}

TEST_CASE("replicate gaussian output stays within the input range") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Grid2D g = random_grid(9, 14, seed, -3, 5);
    const Grid2D out = gaussian_filter(g, 0.5 + 0.3 * static_cast<double>(seed));
    CHECK(out.min() >= g.min() - 1e-12);
    CHECK(out.max() <= g.max() + 1e-12);
  }
}

TEST_CASE("antisymmetric gaussian keeps affine fields unchanged") {
  const GridGeometry geo{12, 15, 0.0385, 0.15};
  const Grid2D g = grid_from(geo, [](auto i, auto j) { return 0.3 - 0.02 * i + 0.0015 * j; });
  CHECK(max_abs_difference(gaussian_filter(g, 2.0, EdgeMode::antisymmetric), g) <= 1e-12);
  // Replicate bends the ramp at the edges.
  CHECK(max_abs_difference(gaussian_filter(g, 2.0, EdgeMode::replicate), g) > 1e-3);
}

TEST_CASE("antisymmetric extension with radius beyond the grid") {
  const GridGeometry geo{3, 3, 1, 1};
  const Grid2D g = grid_from(geo, [](auto i, auto j) { return 2.0 * i - 1.0 * j; });
  for (long i = -7; i < 10; ++i)
    for (long j = -7; j < 10; ++j)
      CHECK(sample_extended(g, i, j, EdgeMode::antisymmetric) == doctest::Approx(2.0 * i - 1.0 * j));
  CHECK(sample_extended(g, -5, 9, EdgeMode::replicate) == g(0, 2));
  CHECK(max_abs_difference(gaussian_filter(g, 3.0, EdgeMode::antisymmetric), g) <= 1e-12);
}

TEST_CASE("strains from a displacement field") {
  const GridGeometry geo{5, 6, 0.5, 0.25};
  const Grid2D wa = grid_from(geo, [&](auto i, auto) { return -0.02 * i * geo.axial_spacing; });
  const Grid2D wl = grid_from(geo, [&](auto, auto j) { return 0.01 * j * geo.lateral_spacing; });
  const StrainPair s = compute_strains(DisplacementField(wa, wl));
  for (double v : s.axial.values()) CHECK(v == doctest::Approx(-0.02));
  for (double v : s.lateral.values()) CHECK(v == doctest::Approx(0.01));
}
