#include "gpe_optctl/grape.hpp"

#include <spdlog/spdlog.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "gpe_optctl/errors.hpp"
#include "gpe_optctl/functionals.hpp"

namespace gpe_optctl {

void GrapeConfig::validate() const {
  if (!(gamma >= 0.0)) throw ConfigError("grape: gamma must be >= 0");
  if (!(line_search.c1 > 0.0 && line_search.c1 < line_search.c2 && line_search.c2 < 1.0)) {
    throw ConfigError("grape: line search needs 0 < c1 < c2 < 1");
  }
  if (line_search.max_trials < 1) throw ConfigError("grape: line search needs max_trials >= 1");
  if (!(line_search.rel_tol > 0.0)) throw ConfigError("grape: line search rel_tol must be positive");
  if (!(line_search.expand > 1.0)) throw ConfigError("grape: line search expand factor must exceed 1");
  if (!(line_search.initial_step_inf > 0.0)) throw ConfigError("grape: initial_step_inf must be positive");
  if (max_equations <= 0) throw ConfigError("grape: max_equations must be positive");
  if (max_iterations <= 0) throw ConfigError("grape: max_iterations must be positive");
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Inverse of the metric on interior nodes: L2 -> I/dt, H1 -> (dt (-D^2))^{-1}, whose entries
/// are dt min(i,j) (m+1-max(i,j)) / (m+1) for 1-based interior indices.
MatrixXd inverse_metric(NormKind norm, std::size_t m, double dt) {
  if (norm == NormKind::L2) return MatrixXd::Identity(m, m) / dt;
  MatrixXd out(m, m);
  const double mp1 = static_cast<double>(m + 1);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double lo = static_cast<double>(std::min(i, j) + 1);
      const double hi = static_cast<double>(std::max(i, j) + 1);
      out(i, j) = dt * lo * (mp1 - hi) / mp1;
    }
  }
  return out;
}

VectorXd interior(const std::vector<double>& v) {
  VectorXd out(static_cast<Eigen::Index>(v.size() - 2));
  for (std::size_t i = 1; i + 1 < v.size(); ++i) out(static_cast<Eigen::Index>(i - 1)) = v[i];
  return out;
}

/// Riesz representer of the node derivative in the chosen norm (interior nodes only).
VectorXd representer(const std::vector<double>& node_derivative, NormKind norm, const TimeGrid& time) {
  auto g = gradient_L2(node_derivative, time);
  if (norm == NormKind::H1) g = gradient_H1(g, time);
  return interior(g.values);
}

struct Iterate {
  ControlField control;
  Trajectory psi;
  double J_T;
  double J;
};

}  // namespace

GrapePhaseResult grape_phase(const ControlProblem& problem, Propagator& prop, TraceRecorder& rec,
                             const ControlField& guess, const GrapeConfig& config, long first_iteration,
                             const GrapeWarmStart* warm) {
  config.validate();
  const TimeGrid& time = problem.time;
  const std::size_t nodes = time.n_nodes();
  if (nodes < 3) throw ConfigError("grape needs at least two time steps");
  const std::size_t m = nodes - 2;
  const double dt = time.dt();
  const std::string scheme = "grape";
  long iteration = first_iteration;

  auto budget_left = [&](long needed) { return prop.counter().total() + needed <= config.max_equations; };
  auto cost_of = [&](const ControlField& c, const Trajectory& traj) {
    const double jt = terminal_cost(traj.final_state(), problem.desired);
    return std::pair{jt, jt + grape_penalty(c, config.gamma)};
  };

  GrapePhaseResult out{guess, 0.0, 0.0, RunStatus::max_iterations, 0};

  std::optional<Iterate> current;
  if (warm != nullptr) {
    const auto [jt, j] = cost_of(warm->control, warm->psi);
    current.emplace(Iterate{warm->control, warm->psi, jt, j});
  } else {
    if (!budget_left(1)) {
      out.status = RunStatus::budget_exhausted;
      return out;
    }
    auto traj = prop.propagate_forward(problem.initial, guess, true);
    const auto [jt, j] = cost_of(guess, traj);
    current.emplace(Iterate{guess, std::move(traj), jt, j});
    TraceRow row;
    row.iteration = iteration;
    row.scheme = scheme;
    row.event = "forward";
    row.J_T = jt;
    row.J = j;
    row.trial_J_T = jt;
    rec.record(row);
  }
  rec.snapshot(iteration, scheme, current->control, true);

  auto finish = [&](RunStatus status) {
    out.control = current->control;
    out.J_T = current->J_T;
    out.J = current->J;
    out.status = status;
    out.iterations = iteration - first_iteration;
    rec.snapshot(iteration, scheme, current->control, true);
    return out;
  };

  if (current->J_T <= config.stop_JT) return finish(RunStatus::converged);

  auto compute_gradient = [&]() -> std::vector<double> {
    const auto p_T = Propagator::terminal_costate(current->psi.final_state(), problem.desired);
    const auto adjoint = prop.propagate_adjoint(p_T, current->psi, current->control);
    return node_gradient(adjoint.step_sensitivity, current->control, config.gamma);
  };
  auto record_adjoint = [&](double grad_norm) {
    TraceRow row;
    row.iteration = iteration;
    row.scheme = scheme;
    row.event = "adjoint";
    row.J_T = current->J_T;
    row.J = current->J;
    row.grad_norm = grad_norm;
    rec.record(row);
  };

  if (!budget_left(1)) return finish(RunStatus::budget_exhausted);
  std::vector<double> e_nodes = compute_gradient();
  VectorXd e = interior(e_nodes);
  VectorXd g = representer(e_nodes, config.norm, time);
  record_adjoint(std::sqrt(std::max(0.0, g.dot(e))));

  const MatrixXd h0 = config.search == SearchKind::bfgs ? inverse_metric(config.norm, m, dt) : MatrixXd();
  MatrixXd hess_inv = h0;
  bool hess_scaled = false;
  VectorXd direction;
  VectorXd prev_direction;
  VectorXd prev_g;
  VectorXd prev_e;
  double prev_step = 0.0;
  double prev_slope = 0.0;
  bool restart = true;
  long since_restart = 0;
  const long cg_period = config.cg_restart > 0 ? config.cg_restart : static_cast<long>(time.n_steps());

  for (long it = 0; it < config.max_iterations; ++it) {
    if (g.squaredNorm() == 0.0) return finish(RunStatus::gradient_vanished);

    if (config.search == SearchKind::bfgs) {
      direction = -(hess_inv * e);
    } else if (restart || since_restart >= cg_period) {
      direction = -g;
      since_restart = 0;
    } else {
      const double beta = std::max(0.0, g.dot(e - prev_e) / prev_g.dot(prev_e));
      direction = -g + beta * prev_direction;
    }
    double slope = e.dot(direction);
    if (!(slope < 0.0)) {
      rec.event("iteration " + std::to_string(iteration) + ": not a descent direction, restarting from the gradient");
      hess_inv = h0;
      hess_scaled = false;
      direction = -g;
      slope = e.dot(direction);
      restart = true;
    }

    const double dir_inf = direction.cwiseAbs().maxCoeff();
    double initial = config.line_search.initial_step_inf / dir_inf;
    if (!restart) {
      initial = config.search == SearchKind::bfgs ? 1.0 : prev_step * prev_slope / slope;
    }
    if (!(initial > 0.0) || !std::isfinite(initial)) initial = config.line_search.initial_step_inf / dir_inf;

    std::optional<Iterate> best;
    auto trial_control = [&](double step) {
      ControlField c = current->control;
      for (std::size_t i = 0; i < m; ++i) c.values[i + 1] += step * direction(static_cast<Eigen::Index>(i));
      return c;
    };
    auto phi = [&](double step) -> std::optional<double> {
      ControlField c = trial_control(step);
      std::optional<Trajectory> traj;
      try {
        traj.emplace(prop.propagate_forward(problem.initial, c, true));
      } catch (const ControlOutOfBounds&) {
        return std::nullopt;
      }
      const auto [jt, j] = cost_of(c, *traj);
      TraceRow row;
      row.iteration = iteration;
      row.scheme = scheme;
      row.event = "line_search";
      row.J_T = current->J_T;
      row.J = current->J;
      row.trial_J_T = jt;
      row.step = step;
      rec.record(row);
      if (!best || j < best->J) best.emplace(Iterate{std::move(c), std::move(*traj), jt, j});
      return j;
    };

    const auto ls = line_minimize(phi, current->J, slope, initial, config.line_search, [&] { return budget_left(1); });

    if (!ls.success) {
      if (ls.out_of_budget) {
        if (best && best->J < current->J) {
          current = std::move(*best);
          ++iteration;
        }
        return finish(RunStatus::budget_exhausted);
      }
      if (restart) {
        rec.event("iteration " + std::to_string(iteration) + ": line search failed along the gradient");
        return finish(RunStatus::line_search_failed);
      }
      rec.event("iteration " + std::to_string(iteration) + ": line search failed, restarting from the gradient");
      hess_inv = h0;
      hess_scaled = false;
      restart = true;
      continue;
    }

    current = std::move(*best);
    ++iteration;
    rec.snapshot(iteration, scheme, current->control);
    spdlog::debug("grape iteration {}: J_T = {:.6e}, step = {:.3e}, trials = {}", iteration, current->J_T, ls.step,
                  ls.trials);

    if (current->J_T <= config.stop_JT) return finish(RunStatus::converged);
    if (!budget_left(1)) return finish(RunStatus::budget_exhausted);

    e_nodes = compute_gradient();
    const VectorXd e_new = interior(e_nodes);
    const VectorXd g_new = representer(e_nodes, config.norm, time);
    record_adjoint(std::sqrt(std::max(0.0, g_new.dot(e_new))));

    const VectorXd s = ls.step * direction;
    const VectorXd y = e_new - e;
    const double sy = s.dot(y);
    const double new_slope = e_new.dot(direction);
    if (new_slope < config.line_search.c2 * slope) {
      rec.event("iteration " + std::to_string(iteration) + ": curvature condition not met");
    }
    if (config.search == SearchKind::bfgs) {
      if (sy > 1e-12 * std::sqrt(s.squaredNorm() * y.squaredNorm())) {
        if (!hess_scaled) {
          const VectorXd h0y = hess_inv * y;
          hess_inv *= sy / y.dot(h0y);
          hess_scaled = true;
        }
        const double rho = 1.0 / sy;
        const VectorXd hy = hess_inv * y;
        const double yhy = y.dot(hy);
        hess_inv.noalias() -= rho * (s * hy.transpose() + hy * s.transpose());
        hess_inv.noalias() += (rho * rho * yhy + rho) * (s * s.transpose());
      } else {
        rec.event("iteration " + std::to_string(iteration) + ": BFGS update skipped (s.y <= 0)");
      }
    }

    prev_direction = direction;
    prev_g = g;
    prev_e = e;
    prev_step = ls.step;
    prev_slope = slope;
    e = e_new;
    g = g_new;
    restart = false;
    ++since_restart;
  }
  return finish(RunStatus::max_iterations);
}

OptimizationResult optimize_grape(const ControlProblem& problem, const ControlField& guess, const GrapeConfig& config) {
  Propagator prop = problem.make_propagator();
  OptimizationResult result{guess, {}, {}, 0.0, 0.0};
  TraceRecorder rec(result.trace, prop, config.snapshot_every);
  const auto phase = grape_phase(problem, prop, rec, guess, config, 0);
  result.control = phase.control;
  result.J_T = phase.J_T;
  result.J = phase.J;
  result.trace.status = phase.status;
  result.counter = prop.counter();
  return result;
}

}  // namespace gpe_optctl
