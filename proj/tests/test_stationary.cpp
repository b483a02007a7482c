#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "gpe_optctl/errors.hpp"
#include "gpe_optctl/stationary.hpp"

using namespace gpe_optctl;

TEST(Stationary, HarmonicOscillatorEnergies) {
  // M = 1, omega = 1, kappa = 0: E_n = n + 1/2.
  auto grid = make_grid(-10.0, 10.0, 256);
  const ShakingShiftedPotential trap(1.0, 1.0, 0.0, 0.0);
  const PhysicalParams phys{1.0, 0.0};
  const auto g = ground_state(trap, 0.0, phys, grid);
  const auto e = excited_state(trap, 0.0, phys, grid, 1);
  EXPECT_NEAR(g.energy, 0.5, 1e-6);
  EXPECT_NEAR(e.energy, 1.5, 1e-6);
  EXPECT_LE(g.residual, 1e-8);
  EXPECT_LE(e.residual, 1e-8);
  EXPECT_EQ(count_nodes(g.psi), 0);
  EXPECT_EQ(count_nodes(e.psi), 1);
  EXPECT_NEAR(std::abs(inner_product(g.psi, e.psi)), 0.0, 1e-12);
  // Ground state amplitude pi^{-1/4} exp(-x^2/2).
  const std::size_t mid = grid->size() / 2;
  EXPECT_NEAR(g.psi[mid].real(), std::pow(M_PI, -0.25), 1e-8);
  const auto e2 = excited_state(trap, 0.0, phys, grid, 2);
  EXPECT_NEAR(e2.energy, 2.5, 1e-6);
  EXPECT_EQ(count_nodes(e2.psi), 2);
}

TEST(Stationary, ShiftedTrapMovesTheState) {
  auto grid = make_grid(-10.0, 10.0, 256);
  const ShakingShiftedPotential trap(1.0, 1.0, 0.0, 0.0);
  const auto g = ground_state(trap, 1.25, {1.0, 0.0}, grid);
  double mean = 0.0;
  for (std::size_t j = 0; j < grid->size(); ++j) mean += grid->x(j) * std::norm(g.psi[j]) * grid->dx();
  EXPECT_NEAR(mean, 1.25, 1e-9);
  EXPECT_NEAR(g.energy, 0.5, 1e-6);
}

TEST(Stationary, NonlinearResidualAndVirial) {
  auto grid = make_grid(-10.0, 10.0, 256);
  const ShakingShiftedPotential trap(0.5, 2.0 * M_PI, 5.0, 0.0);
  const PhysicalParams phys{0.5, 2.0 * M_PI};
  const auto g = ground_state(trap, 0.0, phys, grid);
  EXPECT_LE(stationary_residual(g.psi, trap, 0.0, phys), 1e-8);
  // mu = E + (kappa/2) int |psi|^4
  double quartic = 0.0;
  for (std::size_t j = 0; j < grid->size(); ++j) quartic += std::pow(std::norm(g.psi[j]), 2) * grid->dx();
  EXPECT_NEAR(g.chemical_potential, g.energy + 0.5 * phys.kappa * quartic, 1e-9);
  EXPECT_NEAR(chemical_potential(g.psi, trap, 0.0, phys), g.chemical_potential, 1e-12);
  EXPECT_NEAR(gpe_energy(g.psi, trap, 0.0, phys), g.energy, 1e-12);
}

TEST(Stationary, ThomasFermiLimit) {
  // Strong interaction in a weak harmonic trap: mu -> (3 kappa omega sqrt(M) / (4 sqrt 2))^(2/3).
  auto grid = make_grid(-16.0, 16.0, 256);
  const double M = 1.0, omega = 0.25, kappa = 20.0;
  const ShakingShiftedPotential trap(M, omega, 0.0, 0.0);
  const auto g = ground_state(trap, 0.0, {M, kappa}, grid);
  const double mu_tf = std::pow(3.0 * kappa * omega * std::sqrt(M) / (4.0 * std::sqrt(2.0)), 2.0 / 3.0);
  EXPECT_NEAR(g.chemical_potential / mu_tf, 1.0, 0.03) << "iterations " << g.iterations;
  EXPECT_LT(g.iterations, 100);
}

TEST(Stationary, DoubleWellGroundStateIsSymmetricWithTwoMaxima) {
  auto grid = make_grid(-10.0, 10.0, 256);
  const SplittingPolyPotential v(4.0, 0.5);
  const auto g = ground_state(v, 1.0, {0.5, M_PI / 2}, grid);
  for (std::size_t j = 1; j < grid->size(); ++j) {
    EXPECT_NEAR(g.psi[j].real(), g.psi[grid->mirror_index(j)].real(), 1e-7);
  }
  int maxima = 0;
  const auto rho = g.psi.density();
  const double peak = *std::max_element(rho.begin(), rho.end());
  for (std::size_t j = 1; j + 1 < rho.size(); ++j) {
    maxima += rho[j] > 1e-3 * peak && rho[j] > rho[j - 1] && rho[j] >= rho[j + 1];
  }
  EXPECT_EQ(maxima, 2);
}

TEST(Stationary, MirrorSymmetryDetection) {
  const SpatialGrid grid(-10.0, 10.0, 64);
  const ShakingShiftedPotential trap(1.0, 1.0, 0.0, 0.0);
  EXPECT_TRUE(is_mirror_symmetric(evaluate(trap, grid, 0.0), grid));
  EXPECT_FALSE(is_mirror_symmetric(evaluate(trap, grid, 0.3), grid));
}
