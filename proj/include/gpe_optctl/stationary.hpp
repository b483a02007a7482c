#pragma once

#include "gpe_optctl/potentials.hpp"
#include "gpe_optctl/wavefunction.hpp"

namespace gpe_optctl {

struct StationaryOptions {
  /// Target for ||H psi - mu psi|| with H the full Gross-Pitaevskii operator.
  double residual_tolerance = 1e-8;
  /// Fraction of the new density mixed in per self-consistent iteration (reduced automatically
  /// when the residual grows).
  double mixing = 0.5;
  long max_iterations = 500;
};

struct StationaryState {
  WaveFunction psi;
  double energy = 0.0;              // <T> + <V> + kappa/2 int |psi|^4
  double chemical_potential = 0.0;  // <psi|H|psi>
  double residual = 0.0;            // ||H psi - mu psi||
  long iterations = 0;
};

/// Ground state of the Gross-Pitaevskii equation in V(x, lambda): self-consistent diagonalization
/// of the grid operator with density mixing. The state is real with a positive largest component.
/// Throws NumericalError with the residual when the tolerance is not reached.
StationaryState ground_state(const PotentialFamily& potential, double lambda, const PhysicalParams& phys,
                             const GridPtr& grid, const StationaryOptions& options = {});

/// Stationary state whose linearized operator eigenvalue is the order-th above the lowest; for
/// order = 1 this is the first excited state with one node.
StationaryState excited_state(const PotentialFamily& potential, double lambda, const PhysicalParams& phys,
                              const GridPtr& grid, int order = 1, const StationaryOptions& options = {});

double gpe_energy(const WaveFunction& psi, const PotentialFamily& potential, double lambda,
                  const PhysicalParams& phys);
double chemical_potential(const WaveFunction& psi, const PotentialFamily& potential, double lambda,
                          const PhysicalParams& phys);
double stationary_residual(const WaveFunction& psi, const PotentialFamily& potential, double lambda,
                           const PhysicalParams& phys);

/// Number of sign changes of a real-valued (up to global phase) state, ignoring points whose
/// modulus is below rel_threshold times the maximum.
int count_nodes(const WaveFunction& psi, double rel_threshold = 1e-3);

/// True when V(x_j) equals V(-x_j) on the grid.
bool is_mirror_symmetric(const std::vector<double>& potential, const SpatialGrid& grid);

}  // namespace gpe_optctl
