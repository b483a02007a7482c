#pragma once

#include <optional>

#include "gpe_optctl/control_problem.hpp"
#include "gpe_optctl/gradient.hpp"
#include "gpe_optctl/line_search.hpp"
#include "gpe_optctl/trace.hpp"

namespace gpe_optctl {

enum class SearchKind { conjugate_gradient, bfgs };

struct GrapeConfig {
  SearchKind search = SearchKind::bfgs;
  NormKind norm = NormKind::H1;
  double gamma = 1e-6;
  LineSearchConfig line_search;
  long max_equations = 1500;
  double stop_JT = 1e-2;
  long max_iterations = 100000;
  /// Conjugate-gradient restart period in iterations; 0 means n_steps.
  long cg_restart = 0;
  int snapshot_every = 1;

  void validate() const;
};

/// State handed over when GRAPE continues from another scheme: the control and its stored
/// forward trajectory, so the first GRAPE solve is the adjoint one.
struct GrapeWarmStart {
  ControlField control;
  Trajectory psi;
};

struct GrapePhaseResult {
  ControlField control;
  double J_T = 0.0;
  double J = 0.0;
  RunStatus status = RunStatus::max_iterations;
  long iterations = 0;
};

/// GRAPE run that shares a propagator (and its equation counter) and a trace with the caller.
/// Iteration numbers in the trace start at first_iteration.
GrapePhaseResult grape_phase(const ControlProblem& problem, Propagator& propagator, TraceRecorder& recorder,
                             const ControlField& guess, const GrapeConfig& config, long first_iteration,
                             const GrapeWarmStart* warm_start = nullptr);

/// Concurrent-update optimization of J = J_T + (gamma/2) int lambda'^2 dt: forward solve,
/// adjoint solve, L2 or H1 gradient, conjugate-gradient (Polak-Ribiere, restarted) or dense BFGS
/// direction, and a line search whose every trial is one forward solve.
OptimizationResult optimize_grape(const ControlProblem& problem, const ControlField& guess, const GrapeConfig& config);

}  // namespace gpe_optctl
