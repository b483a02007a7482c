#pragma once

#include <functional>
#include <span>
#include <vector>

#include "gpe_optctl/fft.hpp"
#include "gpe_optctl/potentials.hpp"
#include "gpe_optctl/wavefunction.hpp"

namespace gpe_optctl {

/// Number of complete [0, T] solves of the Gross-Pitaevskii (forward) and adjoint (backward)
/// equations.
struct EquationCounter {
  long n_forward = 0;
  long n_backward = 0;
  long total() const { return n_forward + n_backward; }
};

/// Wavefunctions at the nodes of a TimeGrid, stored contiguously. A trajectory either keeps
/// every node or only the final one.
class Trajectory {
 public:
  Trajectory(GridPtr grid, TimeGrid time, bool all_nodes, WaveRole role);

  const GridPtr& grid_ptr() const { return grid_; }
  const TimeGrid& time() const { return time_; }
  WaveRole role() const { return role_; }
  bool has_all_nodes() const { return all_nodes_; }
  bool has_node(std::size_t n) const { return all_nodes_ ? n < time_.n_nodes() : n == time_.n_steps(); }

  std::span<const cplx> node(std::size_t n) const;
  std::span<cplx> node(std::size_t n);
  WaveFunction state(std::size_t n) const;
  WaveFunction final_state() const { return state(time_.n_steps()); }

 private:
  std::size_t slot(std::size_t n) const;

  GridPtr grid_;
  TimeGrid time_;
  bool all_nodes_;
  WaveRole role_;
  std::size_t n_points_;
  std::vector<cplx> data_;
};

struct PropagatorConfig {
  /// Allowed drift of the squared norm per unit time before a solve is rejected.
  double norm_check_tol = 1e-9;
  /// Convergence tolerance of the per-step control/state consistency loop in sequential sweeps.
  double sequential_tol = 1e-11;
  int sequential_max_iterations = 30;
};

struct AdjointResult {
  Trajectory costate;
  /// dJ_T / d(lambda_mid) for each time step, where lambda_mid is the control used by that step.
  std::vector<double> step_sensitivity;
};

struct SequentialStats {
  long consistency_iterations = 0;
  int max_consistency_iterations = 0;
};

/// Strang split-step integrator for the 1D Gross-Pitaevskii equation and its adjoint.
///
/// A step of length dt at mid-step control lambda applies exp(-i T dt/2), then the pointwise
/// phase exp(-i dt (V(x, lambda) + kappa |psi|^2)), then exp(-i T dt/2), with T the kinetic
/// operator evaluated in Fourier space. The adjoint propagation is the exact transpose of this
/// map, so step sensitivities are the exact derivatives of the discrete terminal cost.
///
/// One instance owns its FFT workspace and counter and must not be used from two threads.
class Propagator {
 public:
  Propagator(GridPtr grid, TimeGrid time, PotentialPtr potential, PhysicalParams phys,
             PropagatorConfig config = {});

  const SpatialGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  const TimeGrid& time() const { return time_; }
  const PotentialFamily& potential() const { return *potential_; }
  const PotentialPtr& potential_ptr() const { return potential_; }
  const PhysicalParams& physics() const { return phys_; }
  const PropagatorConfig& config() const { return config_; }

  const EquationCounter& counter() const { return counter_; }
  void reset_counter() { counter_ = {}; }

  /// Solves the GPE on [0, T] under the given control. Counts one forward solve.
  Trajectory propagate_forward(const WaveFunction& psi0, const ControlField& control, bool store_trajectory);

  /// Runs the same scheme from t = T back to t = 0 with negative steps. Counts one forward solve.
  Trajectory propagate_backward(const WaveFunction& psi_T, const ControlField& control, bool store_trajectory);

  /// Solves the adjoint equation backward from p(T), using the stored forward trajectory.
  /// Counts one backward solve.
  AdjointResult propagate_adjoint(const WaveFunction& p_T, const Trajectory& psi, const ControlField& control);

  /// Rule giving the new control value at node n from the freshly propagated state psi_n.
  using NodeRule = std::function<double(std::size_t n, std::span<const cplx> psi_n)>;

  /// Forward solve in which the control is rewritten node by node while propagating
  /// (sequential update). The value at node n+1 is iterated together with the step n -> n+1
  /// Counts one forward solve, also when it gives up with SequentialUpdateError.
  /// Counts one forward solve.
  Trajectory propagate_sequential(const WaveFunction& psi0, ControlField& control, const NodeRule& rule,
                                  SequentialStats* stats = nullptr);

  /// Recomputes the step sensitivities from stored forward and costate trajectories.
  std::vector<double> step_sensitivities(const Trajectory& psi, const Trajectory& costate,
                                         const ControlField& control);

  /// One split step of length dt (may be negative) at mid-step control lambda_mid.
  void step(std::span<cplx> psi, double lambda_mid, double dt);

  /// p(T) = i <psi_d|psi(T)> psi_d
  static WaveFunction terminal_costate(const WaveFunction& psi_T, const WaveFunction& psi_d);

 private:
  void kinetic(std::span<cplx> psi, double half_dt);
  void kinetic_adjoint(std::span<cplx> psi);
  void fill_potential(double lambda);
  void check_norm(double norm0, std::span<const cplx> psi, double t) const;
  void check_control(const ControlField& control) const;
  double adjoint_step(std::span<const cplx> psi_n, std::span<cplx> p, double lambda_mid, bool with_sensitivity);

  GridPtr grid_;
  TimeGrid time_;
  PotentialPtr potential_;
  PhysicalParams phys_;
  PropagatorConfig config_;
  EquationCounter counter_;

  Fft fft_;
  std::vector<double> kinetic_energy_;   // k^2 / 2M
  std::vector<cplx> half_step_phase_;    // exp(-i k^2/2M dt/2) / N for the grid dt
  std::vector<double> potential_values_;  // scratch V(x, lambda)
  std::vector<double> potential_deriv_;  // scratch dV/dlambda
  std::vector<cplx> scratch_a_;
  std::vector<cplx> scratch_b_;
};

}  // namespace gpe_optctl
