#include <gtest/gtest.h>

#include <cmath>

#include "gpe_optctl/errors.hpp"
#include "gpe_optctl/potentials.hpp"

using namespace gpe_optctl;

namespace {

void expect_derivatives_match(const PotentialFamily& v, double lambda) {
  const double h = 1e-5;
  for (double x : {-3.1, -1.0, -0.2, 0.0, 0.7, 2.5}) {
    const double fd1 = (v.value(x, lambda + h) - v.value(x, lambda - h)) / (2 * h);
    const double fd2 = (v.d_dlambda(x, lambda + h) - v.d_dlambda(x, lambda - h)) / (2 * h);
    EXPECT_NEAR(v.d_dlambda(x, lambda), fd1, 1e-6 * (1.0 + std::abs(fd1))) << "x=" << x;
    EXPECT_NEAR(v.d2_dlambda2(x, lambda), fd2, 1e-6 * (1.0 + std::abs(fd2))) << "x=" << x;
  }
}

}  // namespace

TEST(SplittingPoly, Topology) {
  const SplittingPolyPotential v(4.0, 0.5);
  // lambda = 0: single minimum at the origin.
  EXPECT_LT(v.value(0.0, 0.0), v.value(0.1, 0.0));
  EXPECT_LT(v.value(0.0, 0.0), v.value(-0.1, 0.0));
  // lambda = 1: double well with minima at +-sqrt(alpha / (2 beta)) = +-2.
  const double xm = 2.0;
  EXPECT_NEAR(v.value(xm, 1.0), -4.0 * 4.0 + 0.5 * 16.0, 1e-12);
  EXPECT_LT(v.value(xm, 1.0), v.value(xm + 0.05, 1.0));
  EXPECT_LT(v.value(xm, 1.0), v.value(xm - 0.05, 1.0));
  EXPECT_GT(v.value(0.0, 1.0), v.value(xm, 1.0));
  EXPECT_DOUBLE_EQ(v.value(1.3, 1.0), v.value(-1.3, 1.0));
}

TEST(SplittingPoly, Derivatives) {
  const SplittingPolyPotential v(4.0, 0.5);
  expect_derivatives_match(v, 0.3);
  EXPECT_DOUBLE_EQ(v.d2_dlambda2(1.7, 0.4), 0.0);
  EXPECT_DOUBLE_EQ(v.d_dlambda(1.5, 0.2), -2.0 * 4.0 * 2.25);
}

TEST(ShakingShifted, ShiftIdentityAndDerivatives) {
  const ShakingShiftedPotential v(0.5, 6.0, 5.0, 0.3);
  for (double x : {-2.0, 0.0, 0.4, 1.9}) {
    for (double l : {-0.3, 0.0, 0.25}) {
      EXPECT_DOUBLE_EQ(v.value(x, l), v.value(x - l, 0.0));
      EXPECT_DOUBLE_EQ(v.value(x, l), v.base(x - l));
    }
  }
  expect_derivatives_match(v, 0.2);
  // Harmonic part M omega^2 y^2 / 2.
  const ShakingShiftedPotential h(2.0, 3.0, 0.0, 0.0);
  EXPECT_NEAR(h.value(1.5, 0.5), 0.5 * 2.0 * 9.0 * 1.0, 1e-12);
}

TEST(ShakingShifted, GridAlignedShiftIsARoll) {
  const ShakingShiftedPotential v(0.5, 6.0, 5.0, 0.0);
  const SpatialGrid grid(-10.0, 10.0, 256);
  const int m = 7;
  const auto v0 = evaluate(v, grid, 0.0);
  const auto v1 = evaluate(v, grid, m * grid.dx());
  for (std::size_t j = m; j < grid.size(); ++j) EXPECT_NEAR(v1[j], v0[j - m], 1e-9 * (1.0 + std::abs(v0[j - m])));
}

TEST(PotentialFactory, KindsAndErrors) {
  const auto s = make_potential("splitting_poly", {{"alpha", 4.0}, {"beta", 0.5}});
  EXPECT_EQ(s->kind(), "splitting_poly");
  EXPECT_DOUBLE_EQ(s->coefficients().at("alpha"), 4.0);
  EXPECT_THROW(make_potential("splitting_poly", {{"alpha", 4.0}}), ConfigError);
  EXPECT_THROW(make_potential("rf_dressed", {}), ConfigError);
  const auto k = make_potential("shaking_shifted", {{"mass", 0.5}, {"omega", 6.0}});
  EXPECT_DOUBLE_EQ(k->coefficients().at("c4"), 0.0);
}

TEST(PotentialFactory, Bounds) {
  auto p = std::make_shared<SplittingPolyPotential>(4.0, 0.5);
  p->bounds = std::make_pair(-0.5, 1.5);
  EXPECT_NO_THROW(p->check_lambda(1.0));
  EXPECT_THROW(p->check_lambda(2.0), ControlOutOfBounds);
  EXPECT_THROW(p->check_lambda(std::nan("")), NumericalError);
}
