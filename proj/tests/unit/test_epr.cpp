#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "elastoref/epr.hpp"
#include "elastoref/error.hpp"
#include "test_support.hpp"

using namespace elastoref;
using elastoref::testing::grid_from;
using elastoref::testing::random_grid;

namespace {

const GridGeometry kGeo{6, 7, 1.0, 1.0};

StrainPair constant_strains(double e11, double e22, const GridGeometry& geo = kGeo) {
  return {Grid2D(geo, e11), Grid2D(geo, e22)};
}

// Strain pair whose EPR is uniform in [lo, hi] per pixel, e11 in [-0.03, -0.01].
StrainPair random_strains(std::uint64_t seed, double lo, double hi, const GridGeometry& geo = kGeo) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> e(-0.03, -0.01);
  std::uniform_real_distribution<double> v(lo, hi);
  StrainPair s{Grid2D(geo), Grid2D(geo)};
  for (std::size_t k = 0; k < s.axial.size(); ++k) {
    s.axial.values()[k] = e(rng);
    s.lateral.values()[k] = -v(rng) * s.axial.values()[k];
  }
  return s;
}

}  // namespace

TEST_CASE("compute_epr direct ratio") {
  const EprField half = compute_epr(constant_strains(-0.02, 0.01));
  for (double v : half.values.values()) CHECK(v == 0.5);
  CHECK(half.degenerate_count() == 0);
  const EprField zero = compute_epr(constant_strains(-0.02, 0.0));
  for (double v : zero.values.values()) CHECK(v == 0.0);
}

TEST_CASE("compute_epr degenerate pixels take the bounds midpoint") {
  StrainPair s = constant_strains(-0.02, 0.01);
  s.axial(2, 3) = 1e-9;
  const EprField e = compute_epr(s, 1e-6, {0.1, 0.6});
  CHECK(e.values(2, 3) == doctest::Approx(0.35).epsilon(1e-15));
  CHECK(e.degenerate[2 * kGeo.cols + 3] == 1);
  CHECK(e.degenerate_count() == 1);
  CHECK(e.values.all_finite());
  // Exactly zero axial strain never produces inf/nan.
  s.axial(0, 0) = 0.0;
  CHECK(compute_epr(s).values.all_finite());
}

TEST_CASE("compute_epr errors") {
  CHECK_THROWS_AS(compute_epr({Grid2D(kGeo), Grid2D(GridGeometry{6, 7, 1, 2})}), DimensionError);
  CHECK_THROWS_AS(compute_epr(constant_strains(-0.02, 0.01), 0.0), ParameterError);
  CHECK_THROWS_AS(compute_epr(constant_strains(-0.02, 0.01), 1e-6, {0.6, 0.1}), ParameterError);
}

TEST_CASE("feasibility mask") {
  const FeasibilityBounds b{0.1, 0.6};
  const auto mask_of = [&](double epr) {
    return feasibility_mask(compute_epr(constant_strains(-0.02, 0.02 * epr)), b);
  };
  CHECK(mask_of(0.5).empty());
  CHECK(mask_of(0.5).fraction() == 0.0);
  CHECK(mask_of(0.7).fraction() == 1.0);

  EprField e{Grid2D(kGeo, 0.5), std::vector<std::uint8_t>(kGeo.size(), 0), kDefaultEprFloor};
  e.values(1, 1) = 0.6;
  e.values(1, 2) = 0.1;
  e.values(1, 3) = 0.09;
  e.values(1, 4) = 0.6 - 1e-12;
  const FeasibilityMask m = feasibility_mask(e, b);
  CHECK(m.values(1, 1) == 1.0);
  CHECK(m.values(1, 2) == 1.0);
  CHECK(m.values(1, 3) == 1.0);
  CHECK(m.values(1, 4) == 0.0);
  CHECK(m.values(0, 0) == 0.0);

  // Degenerate pixels carry no evidence.
  e.values(2, 2) = 5.0;
  e.degenerate[2 * kGeo.cols + 2] = 1;
  CHECK(feasibility_mask(e, b).values(2, 2) == 0.0);
}

TEST_CASE("mask is empty after clamping strictly inside the bounds") {
  const FeasibilityBounds b{0.1, 0.6};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    EprField e = compute_epr(random_strains(seed, -1.0, 2.0));
    const double delta = 1e-3 * static_cast<double>(seed + 1);
    for (double& v : e.values.values()) v = std::clamp(v, b.v_min + delta, b.v_max - delta);
    CHECK(feasibility_mask(e, b).empty());
  }
}

TEST_CASE("picture data loss") {
  const FeasibilityBounds b{0.1, 0.6};
  SUBCASE("zero when every pixel is feasible") {
    const StrainPair s = random_strains(3, 0.2, 0.5);
    const EprField e = compute_epr(s);
    CHECK(picture_data_loss(s, e, feasibility_mask(e, b), b).l_vd == 0.0);
  }
  SUBCASE("single out-of-range pixel, hand evaluation") {
    StrainPair s = constant_strains(-0.02, 0.01);
    s.lateral(3, 4) = 0.02;
    const EprField e = compute_epr(s);
    const FeasibilityMask m = feasibility_mask(e, b);
    CHECK(m.fraction() == doctest::Approx(1.0 / 42.0));
    const DataLoss loss = picture_data_loss(s, e, m, b);
    CHECK(loss.mean_inrange_epr == 0.5);
    CHECK(loss.l_vd == doctest::Approx(0.01 / std::sqrt(42.0)).epsilon(1e-12));
  }
  SUBCASE("homogeneous of degree one in the strains") {
    StrainPair s = random_strains(5, -0.5, 1.5);
    const EprField e = compute_epr(s);
    const FeasibilityMask m = feasibility_mask(e, b);
    const double base = picture_data_loss(s, e, m, b).l_vd;
    for (double& v : s.axial.values()) v *= 2;
    for (double& v : s.lateral.values()) v *= 2;
    const EprField e2 = compute_epr(s);
    const FeasibilityMask m2 = feasibility_mask(e2, b);
    CHECK(m2.values == m.values);
    CHECK(picture_data_loss(s, e2, m2, b).l_vd == doctest::Approx(2 * base).epsilon(1e-12));
  }
  SUBCASE("no in-range pixel is a degenerate-statistics error") {
    const StrainPair s = constant_strains(-0.02, 0.02);
    const EprField e = compute_epr(s);
    CHECK_THROWS_AS(picture_data_loss(s, e, feasibility_mask(e, b), b), DegenerateStatisticsError);
  }
}

TEST_CASE("mean in-range EPR lies within the bounds") {
  const FeasibilityBounds b{0.1, 0.6};
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const StrainPair s = random_strains(seed, -0.4, 1.2);
    const EprField e = compute_epr(s);
    const DataLoss loss = picture_data_loss(s, e, feasibility_mask(e, b), b);
    CHECK(loss.mean_inrange_epr > b.v_min);
    CHECK(loss.mean_inrange_epr < b.v_max);
  }
}

TEST_CASE("smoothness loss") {
  const GridGeometry geo{8, 9, 1.0, 1.0};
  const auto field = [&](auto f) {
    return EprField{grid_from(geo, f), std::vector<std::uint8_t>(geo.size(), 0), kDefaultEprFloor};
  };
  CHECK(epr_smoothness_loss(field([](auto, auto) { return 0.4; }), 1.0) == 0.0);
  const EprField ramp = field([](auto i, auto) { return 0.3 + 0.01 * static_cast<double>(i); });
  CHECK(epr_smoothness_loss(ramp, 1.0) == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(epr_smoothness_loss(ramp, 0.0) == epr_smoothness_loss(ramp, 1.0));
  const EprField lat = field([](auto, auto j) { return 0.3 - 0.02 * static_cast<double>(j); });
  CHECK(epr_smoothness_loss(lat, 0.5) == doctest::Approx(0.01).epsilon(1e-12));
  CHECK_THROWS_AS(epr_smoothness_loss(ramp, -1.0), ParameterError);
}

TEST_CASE("smoothness loss ignores a constant offset") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    EprField e{random_grid(7, 9, seed, 0, 1), {}, kDefaultEprFloor};
    const double base = epr_smoothness_loss(e, 0.7);
    for (double& v : e.values.values()) v += 3.25;
    CHECK(epr_smoothness_loss(e, 0.7) == doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("picture loss composition") {
  const FeasibilityBounds b{0.1, 0.6};
  SUBCASE("feasible constant EPR") {
    const PictureLossReport r = picture_loss(constant_strains(-0.02, 0.01), b);
    CHECK(r.l_vd == 0.0);
    CHECK(r.l_vs == 0.0);
    CHECK(r.l_v == 0.0);
    CHECK(r.out_of_range_fraction == 0.0);
  }
  SUBCASE("weights") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> w(0.0, 10.0);
    const StrainPair s = random_strains(17, -0.3, 1.1);
    const PictureLossReport zero = picture_loss(s, b, 1.0, 0.0);
    CHECK(zero.l_v == zero.l_vd);
    for (int t = 0; t < 10; ++t) {
      const double lambda = w(rng);
      const PictureLossReport r = picture_loss(s, b, 1.0, lambda);
      CHECK(r.l_v == r.l_vd + lambda * r.l_vs);
      CHECK(r.l_v >= r.l_vd);
      CHECK(r.l_v >= 0.0);
    }
    CHECK_THROWS_AS(picture_loss(s, b, 1.0, -1.0), ParameterError);
  }
}

TEST_CASE("losses are covariant under transposition") {
  const FeasibilityBounds b{0.1, 0.6};
  const GridGeometry geo{9, 12, 1.0, 1.0};
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const StrainPair s = random_strains(seed, -0.2, 1.0, geo);
    const StrainPair t = s.transposed();
    const EprField es = compute_epr(s);
    const EprField et = compute_epr(t);
    CHECK(feasibility_mask(et, b).values == feasibility_mask(es, b).values.transposed());
    const PictureLossReport rs = picture_loss(s, b, 1.0, 0.8);
    const PictureLossReport rt = picture_loss(t, b, 1.0, 0.8);
    CHECK(rt.l_vd == doctest::Approx(rs.l_vd).epsilon(1e-12));
    CHECK(rt.l_vs == doctest::Approx(rs.l_vs).epsilon(1e-12));
    CHECK(rt.l_v == doctest::Approx(rs.l_v).epsilon(1e-12));
  }
}
