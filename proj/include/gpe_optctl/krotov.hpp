#pragma once

#include <optional>

#include "gpe_optctl/control_problem.hpp"
#include "gpe_optctl/functionals.hpp"
#include "gpe_optctl/grape.hpp"
#include "gpe_optctl/trace.hpp"

namespace gpe_optctl {

enum class UpdateMode { explicit_update, newton };

std::string to_string(UpdateMode mode);

struct AdaptiveK {
  double k0 = 1e-4;
  double growth = 1.5;
  /// k grows until one iteration lowers J_T by at least this fraction, then stays fixed.
  double target_decrease = 0.025;
};

struct KrotovConfig {
  double k = 1e-3;
  ShapeKind shape = ShapeKind::sine_ramp;
  double ramp_fraction = 0.1;
  UpdateMode update_mode = UpdateMode::newton;
  double newton_tol = 1e-6;
  int newton_max_iterations = 50;
  std::optional<AdaptiveK> adaptive;
  long max_equations = 1500;
  double stop_JT = 1e-2;
  long max_iterations = 100000;
  /// k is halved once J has risen for more than this many consecutive iterations.
  int rise_limit = 3;
  int max_halvings = 3;
  int snapshot_every = 1;

  void validate() const;
};

struct KrotovSweepStats {
  long rule_evaluations = 0;
  long newton_iterations = 0;
  int newton_max = 0;
  long fallbacks = 0;  // nodes where the Newton denominator vanished

  double newton_mean() const {
    return rule_evaluations > 0 ? static_cast<double>(newton_iterations) / static_cast<double>(rule_evaluations) : 0.0;
  }
};

struct KrotovSweep {
  ControlField control;
  Trajectory psi;
  KrotovSweepStats stats;
};

/// Re<p|dV/dlambda(lambda)|psi> on the spatial grid.
double krotov_overlap(const Propagator& propagator, std::span<const cplx> p, std::span<const cplx> psi, double lambda,
                      bool second_derivative = false);

/// One sequential sweep with the explicit rule
/// lambda_new(t_n) = lambda_old(t_n) + S_n Re<p_old(t_n)|dV/dlambda(lambda_old)|psi_new(t_n)>,
/// where S_n = k s(t_n). The state is propagated under the updated values as they are produced.
KrotovSweep krotov_update_explicit(Propagator& propagator, const WaveFunction& psi0, const ControlField& old_control,
                                   const Trajectory& costate, const std::vector<double>& update_shape);

/// Same sweep, but each node value solves lambda - lambda_old - S Re<p|dV/dlambda(lambda)|psi> = 0 by
/// Newton iteration started from the explicit value, until the correction is below tol.
KrotovSweep krotov_update_newton(Propagator& propagator, const WaveFunction& psi0, const ControlField& old_control,
                                 const Trajectory& costate, const std::vector<double>& update_shape, double tol,
                                 int max_iterations = 50);

struct KrotovPhaseResult {
  ControlField control;
  std::optional<Trajectory> psi;  // forward trajectory of the returned control, when stored
  double J_T = 0.0;
  double J = 0.0;
  RunStatus status = RunStatus::max_iterations;
  long iterations = 0;
};

/// Krotov iterations sharing a propagator and trace with the caller; stops after max_iterations.
KrotovPhaseResult krotov_phase(const ControlProblem& problem, Propagator& propagator, TraceRecorder& recorder,
                               const ControlField& guess, const KrotovConfig& config, long max_iterations);

/// Krotov's sequential method. One iteration is an adjoint solve along the current trajectory
/// followed by a forward sweep that updates the control while propagating.
OptimizationResult optimize_krotov(const ControlProblem& problem, const ControlField& guess, const KrotovConfig& config);

/// Krotov for switch_after iterations, then GRAPE from the resulting control with a fresh
/// Hessian. Both phases draw on the GRAPE equation budget; switch_after = 0 is plain GRAPE.
OptimizationResult optimize_hybrid(const ControlProblem& problem, const ControlField& guess,
                                   const KrotovConfig& krotov_config, const GrapeConfig& grape_config,
                                   long switch_after);

}  // namespace gpe_optctl
