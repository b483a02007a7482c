#include "gpe_optctl/krotov.hpp"

#include <spdlog/spdlog.h>

#include <cmath>

#include "gpe_optctl/errors.hpp"

namespace gpe_optctl {

std::string to_string(UpdateMode mode) { return mode == UpdateMode::newton ? "newton" : "explicit"; }

void KrotovConfig::validate() const {
  if (!adaptive && !(k > 0.0)) throw ConfigError("krotov: k must be positive");
  if (!(newton_tol > 0.0)) throw ConfigError("krotov: newton_tol must be positive");
  if (newton_max_iterations < 1) throw ConfigError("krotov: newton_max_iterations must be >= 1");
  if (adaptive) {
    if (!(adaptive->k0 > 0.0)) throw ConfigError("krotov: adaptive k0 must be positive");
    if (!(adaptive->growth > 1.0)) throw ConfigError("krotov: adaptive growth must exceed 1");
    if (!(adaptive->target_decrease > 0.0 && adaptive->target_decrease < 1.0)) {
      throw ConfigError("krotov: adaptive target decrease must lie in (0, 1)");
    }
  }
  if (max_equations <= 0) throw ConfigError("krotov: max_equations must be positive");
  if (max_iterations <= 0) throw ConfigError("krotov: max_iterations must be positive");
  if (rise_limit < 0 || max_halvings < 0) throw ConfigError("krotov: rise_limit and max_halvings must be >= 0");
}

double krotov_overlap(const Propagator& prop, std::span<const cplx> p, std::span<const cplx> psi, double lambda,
                      bool second_derivative) {
  const auto& pot = prop.potential();
  const auto x = prop.grid().positions();
  double sum = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double dv = second_derivative ? pot.d2_dlambda2(x[j], lambda) : pot.d_dlambda(x[j], lambda);
    sum += (std::conj(p[j]) * psi[j]).real() * dv;
  }
  return sum * prop.grid().dx();
}

namespace {

void check_inputs(const Propagator& prop, const ControlField& old_control, const Trajectory& costate,
                  const std::vector<double>& shape) {
  if (!costate.has_all_nodes() || !(costate.time() == prop.time()) || !(old_control.time == prop.time())) {
    throw std::invalid_argument("krotov update needs a full costate trajectory on the propagator time grid");
  }
  if (shape.size() != old_control.size()) throw std::invalid_argument("update shape length does not match control");
}

KrotovSweep sweep(Propagator& prop, const WaveFunction& psi0, const ControlField& old_control,
                  const Trajectory& costate, const std::vector<double>& shape, bool newton, double tol,
                  int max_iterations) {
  check_inputs(prop, old_control, costate, shape);
  KrotovSweepStats stats;
  auto rule = [&](std::size_t n, std::span<const cplx> psi) -> double {
    const double old = old_control.values[n];
    const double s = shape[n];
    if (s == 0.0) return old;
    const auto p = costate.node(n);
    ++stats.rule_evaluations;
    const double lambda0 = old + s * krotov_overlap(prop, p, psi, old);
    if (!newton) return lambda0;
    double lambda = lambda0;
    int it = 0;
    for (;;) {
      ++it;
      const double num = -(lambda - old) + s * krotov_overlap(prop, p, psi, lambda);
      const double den = 1.0 - s * krotov_overlap(prop, p, psi, lambda, true);
      if (std::abs(den) < 1e-12) {
        ++stats.fallbacks;
        lambda = lambda0;
        break;
      }
      const double delta = num / den;
      lambda += delta;
      if (std::abs(delta) < tol) break;
      if (it >= max_iterations) throw NumericalError("Newton iteration for the Krotov update did not converge");
    }
    stats.newton_iterations += it;
    stats.newton_max = std::max(stats.newton_max, it);
    return lambda;
  };
  ControlField control = old_control;
  Trajectory psi = prop.propagate_sequential(psi0, control, rule);
  if (!control.is_finite()) throw NumericalError("krotov update produced a non-finite control");
  return {std::move(control), std::move(psi), stats};
}

}  // namespace

KrotovSweep krotov_update_explicit(Propagator& prop, const WaveFunction& psi0, const ControlField& old_control,
                                   const Trajectory& costate, const std::vector<double>& shape) {
  return sweep(prop, psi0, old_control, costate, shape, false, 0.0, 0);
}

KrotovSweep krotov_update_newton(Propagator& prop, const WaveFunction& psi0, const ControlField& old_control,
                                 const Trajectory& costate, const std::vector<double>& shape, double tol,
                                 int max_iterations) {
  if (!(tol > 0.0)) throw ConfigError("newton tolerance must be positive");
  return sweep(prop, psi0, old_control, costate, shape, true, tol, max_iterations);
}

KrotovPhaseResult krotov_phase(const ControlProblem& problem, Propagator& prop, TraceRecorder& rec,
                               const ControlField& guess, const KrotovConfig& config, long max_iterations) {
  config.validate();
  const std::string scheme = "krotov";
  const auto base_shape = make_shape(config.shape, config.ramp_fraction, problem.time);
  double k = config.adaptive ? config.adaptive->k0 : config.k;
  bool k_frozen = !config.adaptive;
  const std::string mode = to_string(config.update_mode);
  long iteration = 0;
  auto budget_left = [&](long needed) { return prop.counter().total() + needed <= config.max_equations; };

  KrotovPhaseResult out{guess, std::nullopt, 0.0, 0.0, RunStatus::max_iterations, 0};
  if (!budget_left(1)) {
    out.status = RunStatus::budget_exhausted;
    return out;
  }

  ControlField control = guess;
  Trajectory psi = prop.propagate_forward(problem.initial, control, true);
  double J_T = terminal_cost(psi.final_state(), problem.desired);
  double J = J_T;
  {
    TraceRow row;
    row.iteration = 0;
    row.scheme = scheme;
    row.event = "forward";
    row.J_T = J_T;
    row.J = J;
    row.trial_J_T = J_T;
    row.k = k;
    row.update_mode = mode;
    rec.record(row);
  }
  rec.snapshot(0, scheme, control, true);

  auto finish = [&](RunStatus status) {
    out.control = control;
    out.psi.emplace(std::move(psi));
    out.J_T = J_T;
    out.J = J;
    out.status = status;
    out.iterations = iteration;
    rec.snapshot(iteration, scheme, control, true);
    return out;
  };

  if (J_T <= config.stop_JT) return finish(RunStatus::converged);

  int rises = 0;
  int halvings = 0;
  auto halve_k = [&](const std::string& reason) {
    if (halvings >= config.max_halvings) {
      rec.event("iteration " + std::to_string(iteration) + ": " + reason + " after " + std::to_string(halvings) +
                " halvings of k, aborting");
      return false;
    }
    k *= 0.5;
    k_frozen = true;
    ++halvings;
    rises = 0;
    rec.event("iteration " + std::to_string(iteration) + ": " + reason + ", k halved to " + std::to_string(k));
    return true;
  };
  // The costate depends only on the current control, so it survives a rejected sweep.
  std::optional<AdjointResult> adjoint;
  while (iteration < max_iterations) {
    if (!budget_left(adjoint ? 1 : 2)) return finish(RunStatus::budget_exhausted);

    if (!adjoint) {
      const auto p_T = Propagator::terminal_costate(psi.final_state(), problem.desired);
      adjoint = prop.propagate_adjoint(p_T, psi, control);
      TraceRow row;
      row.iteration = iteration;
      row.scheme = scheme;
      row.event = "adjoint";
      row.J_T = J_T;
      row.J = J;
      row.k = k;
      row.update_mode = mode;
      rec.record(row);
    }

    std::vector<double> shape(base_shape.size());
    for (std::size_t n = 0; n < shape.size(); ++n) shape[n] = k * base_shape[n];
    std::optional<KrotovSweep> attempt;
    try {
      attempt = config.update_mode == UpdateMode::newton
                    ? krotov_update_newton(prop, problem.initial, control, adjoint->costate, shape, config.newton_tol,
                                           config.newton_max_iterations)
                    : krotov_update_explicit(prop, problem.initial, control, adjoint->costate, shape);
    } catch (const SequentialUpdateError& e) {
      TraceRow row;
      row.iteration = iteration;
      row.scheme = scheme;
      row.event = "sweep_rejected";
      row.J_T = J_T;
      row.J = J;
      row.k = k;
      row.update_mode = mode;
      rec.record(row);
      if (!halve_k(std::string("sweep rejected (") + e.what() + ")")) return finish(RunStatus::aborted);
      continue;
    }
    KrotovSweep& result = *attempt;
    adjoint.reset();

    const double new_J_T = terminal_cost(result.psi.final_state(), problem.desired);
    const double new_J = new_J_T + krotov_penalty(result.control, control, KrotovCostParams{k, base_shape});
    const double previous_J_T = J_T;
    const double previous_J = J;
    control = std::move(result.control);
    psi = std::move(result.psi);
    J_T = new_J_T;
    J = new_J;
    ++iteration;

    TraceRow row;
    row.iteration = iteration;
    row.scheme = scheme;
    row.event = "sweep";
    row.J_T = J_T;
    row.J = J;
    row.trial_J_T = J_T;
    row.k = k;
    row.update_mode = mode;
    if (config.update_mode == UpdateMode::newton) {
      row.newton_mean = result.stats.newton_mean();
      row.newton_max = result.stats.newton_max;
    }
    rec.record(row);
    rec.snapshot(iteration, scheme, control);
    if (result.stats.fallbacks > 0) {
      rec.event("iteration " + std::to_string(iteration) + ": Newton denominator vanished at " +
                std::to_string(result.stats.fallbacks) + " nodes, explicit value used");
    }
    spdlog::debug("krotov iteration {}: J_T = {:.6e}, J = {:.6e}, k = {:.3e}", iteration, J_T, J, k);

    if (!std::isfinite(J_T)) throw NumericalError("krotov iteration produced a non-finite cost");
    if (J_T <= config.stop_JT) return finish(RunStatus::converged);

    if (J > previous_J) {
      ++rises;
    } else {
      rises = 0;
    }
    if (rises > config.rise_limit) {
      if (!halve_k("J rose for more than " + std::to_string(config.rise_limit) + " iterations")) {
        return finish(RunStatus::aborted);
      }
      continue;
    }
    if (!k_frozen) {
      const double decrease = (previous_J_T - J_T) / previous_J_T;
      if (decrease >= config.adaptive->target_decrease) {
        k_frozen = true;
        rec.event("iteration " + std::to_string(iteration) + ": k frozen at " + std::to_string(k));
      } else {
        k *= config.adaptive->growth;
      }
    }
  }
  return finish(RunStatus::max_iterations);
}

OptimizationResult optimize_krotov(const ControlProblem& problem, const ControlField& guess,
                                   const KrotovConfig& config) {
  Propagator prop = problem.make_propagator();
  OptimizationResult result{guess, {}, {}, 0.0, 0.0};
  TraceRecorder rec(result.trace, prop, config.snapshot_every);
  const auto phase = krotov_phase(problem, prop, rec, guess, config, config.max_iterations);
  result.control = phase.control;
  result.J_T = phase.J_T;
  result.J = phase.J;
  result.trace.status = phase.status;
  result.counter = prop.counter();
  return result;
}

OptimizationResult optimize_hybrid(const ControlProblem& problem, const ControlField& guess,
                                   const KrotovConfig& krotov_config, const GrapeConfig& grape_config,
                                   long switch_after) {
  if (switch_after < 0) throw ConfigError("hybrid: switch_after must be >= 0");
  if (switch_after == 0) return optimize_grape(problem, guess, grape_config);

  Propagator prop = problem.make_propagator();
  OptimizationResult result{guess, {}, {}, 0.0, 0.0};
  TraceRecorder rec(result.trace, prop, krotov_config.snapshot_every);
  const auto krotov = krotov_phase(problem, prop, rec, guess, krotov_config, switch_after);
  result.control = krotov.control;
  result.J_T = krotov.J_T;
  result.J = krotov.J;
  result.trace.status = krotov.status;
  if (krotov.status == RunStatus::max_iterations && krotov.psi) {
    rec.event("switching from krotov to grape after " + std::to_string(krotov.iterations) + " iterations");
    const GrapeWarmStart warm{krotov.control, *krotov.psi};
    const auto grape = grape_phase(problem, prop, rec, krotov.control, grape_config, krotov.iterations, &warm);
    result.control = grape.control;
    result.J_T = grape.J_T;
    result.J = grape.J;
    result.trace.status = grape.status;
  }
  result.counter = prop.counter();
  return result;
}

}  // namespace gpe_optctl
