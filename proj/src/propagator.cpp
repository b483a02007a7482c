#include "gpe_optctl/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gpe_optctl/errors.hpp"

namespace gpe_optctl {

Trajectory::Trajectory(GridPtr grid, TimeGrid time, bool all_nodes, WaveRole role)
    : grid_(std::move(grid)),
      time_(time),
      all_nodes_(all_nodes),
      role_(role),
      n_points_(grid_->size()),
      data_((all_nodes ? time.n_nodes() : 1) * n_points_) {}

std::size_t Trajectory::slot(std::size_t n) const {
  if (!has_node(n)) throw std::out_of_range("trajectory does not store time node " + std::to_string(n));
  return all_nodes_ ? n : 0;
}

std::span<const cplx> Trajectory::node(std::size_t n) const {
  return std::span<const cplx>(data_).subspan(slot(n) * n_points_, n_points_);
}

std::span<cplx> Trajectory::node(std::size_t n) {
  return std::span<cplx>(data_).subspan(slot(n) * n_points_, n_points_);
}

WaveFunction Trajectory::state(std::size_t n) const {
  const auto s = node(n);
  return WaveFunction(grid_, std::vector<cplx>(s.begin(), s.end()), role_);
}

namespace {

double squared_norm(std::span<const cplx> psi, double dx) {
  double sum = 0.0;
  for (const auto& a : psi) sum += std::norm(a);
  return sum * dx;
}

}  // namespace

Propagator::Propagator(GridPtr grid, TimeGrid time, PotentialPtr potential, PhysicalParams phys,
                       PropagatorConfig config)
    : grid_(std::move(grid)),
      time_(time),
      potential_(std::move(potential)),
      phys_(phys),
      config_(config),
      fft_(grid_->size()) {
  phys_.validate();
  const std::size_t n = grid_->size();
  kinetic_energy_.resize(n);
  half_step_phase_.resize(n);
  const auto k = grid_->wavenumbers();
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t j = 0; j < n; ++j) {
    kinetic_energy_[j] = k[j] * k[j] / (2.0 * phys_.mass);
    half_step_phase_[j] = std::polar(inv_n, -kinetic_energy_[j] * 0.5 * time_.dt());
  }
  potential_values_.resize(n);
  potential_deriv_.resize(n);
  scratch_a_.resize(n);
  scratch_b_.resize(n);
}

void Propagator::kinetic(std::span<cplx> psi, double half_dt) {
  fft_.forward(psi);
  if (half_dt == 0.5 * time_.dt()) {
    for (std::size_t j = 0; j < psi.size(); ++j) psi[j] *= half_step_phase_[j];
  } else {
    const double inv_n = 1.0 / static_cast<double>(psi.size());
    for (std::size_t j = 0; j < psi.size(); ++j) psi[j] *= std::polar(inv_n, -kinetic_energy_[j] * half_dt);
  }
  fft_.backward(psi);
}

void Propagator::kinetic_adjoint(std::span<cplx> psi) {
  fft_.forward(psi);
  for (std::size_t j = 0; j < psi.size(); ++j) psi[j] *= std::conj(half_step_phase_[j]);
  fft_.backward(psi);
}

void Propagator::fill_potential(double lambda) {
  potential_->check_lambda(lambda);
  const auto x = grid_->positions();
  for (std::size_t j = 0; j < x.size(); ++j) potential_values_[j] = potential_->value(x[j], lambda);
}

void Propagator::step(std::span<cplx> psi, double lambda_mid, double dt) {
  kinetic(psi, 0.5 * dt);
  fill_potential(lambda_mid);
  const double kappa = phys_.kappa;
  for (std::size_t j = 0; j < psi.size(); ++j) {
    const double theta = dt * (potential_values_[j] + kappa * std::norm(psi[j]));
    psi[j] *= std::polar(1.0, -theta);
  }
  kinetic(psi, 0.5 * dt);
}

void Propagator::check_norm(double norm0, std::span<const cplx> psi, double t) const {
  const double n2 = squared_norm(psi, grid_->dx());
  if (!std::isfinite(n2) || std::abs(n2 - norm0) > config_.norm_check_tol * std::max(1.0, t)) {
    std::ostringstream msg;
    msg << "norm drift " << (n2 - norm0) << " at t = " << t
        << " ms exceeds tolerance; reduce dt or enlarge the spatial grid";
    throw NumericalError(msg.str());
  }
}

void Propagator::check_control(const ControlField& control) const {
  if (!(control.time == time_)) throw std::invalid_argument("control time grid does not match propagator");
  if (!control.is_finite()) throw NumericalError("control contains non-finite values");
}

Trajectory Propagator::propagate_forward(const WaveFunction& psi0, const ControlField& control,
                                         bool store_trajectory) {
  require_same_grid(psi0.grid(), *grid_);
  check_control(control);
  Trajectory traj(grid_, time_, store_trajectory, WaveRole::state);
  std::vector<cplx> psi(psi0.amplitudes().begin(), psi0.amplitudes().end());
  const double norm0 = squared_norm(psi, grid_->dx());
  if (store_trajectory) std::copy(psi.begin(), psi.end(), traj.node(0).begin());
  const double dt = time_.dt();
  for (std::size_t n = 0; n < time_.n_steps(); ++n) {
    step(psi, control.midpoint(n), dt);
    check_norm(norm0, psi, time_.t(n + 1));
    if (store_trajectory) std::copy(psi.begin(), psi.end(), traj.node(n + 1).begin());
  }
  if (!store_trajectory) std::copy(psi.begin(), psi.end(), traj.node(time_.n_steps()).begin());
  ++counter_.n_forward;
  return traj;
}

Trajectory Propagator::propagate_backward(const WaveFunction& psi_T, const ControlField& control,
                                          bool store_trajectory) {
  require_same_grid(psi_T.grid(), *grid_);
  check_control(control);
  // Stored in time order; node 0 holds the recovered initial state.
  Trajectory traj(grid_, time_, true, WaveRole::state);
  std::vector<cplx> psi(psi_T.amplitudes().begin(), psi_T.amplitudes().end());
  const double norm0 = squared_norm(psi, grid_->dx());
  const std::size_t steps = time_.n_steps();
  std::copy(psi.begin(), psi.end(), traj.node(steps).begin());
  for (std::size_t n = steps; n-- > 0;) {
    step(psi, control.midpoint(n), -time_.dt());
    check_norm(norm0, psi, time_.t_final() - time_.t(n));
    std::copy(psi.begin(), psi.end(), traj.node(n).begin());
  }
  ++counter_.n_forward;
  if (store_trajectory) return traj;
  Trajectory initial_only(grid_, time_, false, WaveRole::state);
  const auto first = traj.node(0);
  std::copy(first.begin(), first.end(), initial_only.node(steps).begin());
  return initial_only;
}

double Propagator::adjoint_step(std::span<const cplx> psi_n, std::span<cplx> p, double lambda_mid,
                                bool with_sensitivity) {
  const double dt = time_.dt();
  const double kappa = phys_.kappa;
  auto& phi = scratch_a_;
  std::copy(psi_n.begin(), psi_n.end(), phi.begin());
  kinetic(phi, 0.5 * dt);
  kinetic_adjoint(p);
  fill_potential(lambda_mid);
  if (with_sensitivity) {
    const auto x = grid_->positions();
    for (std::size_t j = 0; j < x.size(); ++j) potential_deriv_[j] = potential_->d_dlambda(x[j], lambda_mid);
  }
  double sens = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    const double theta = dt * (potential_values_[j] + kappa * std::norm(phi[j]));
    const cplx h = std::polar(1.0, theta) * p[j];
    const double r = (std::conj(h) * phi[j]).real();
    if (with_sensitivity) sens += r * potential_deriv_[j];
    p[j] = h + cplx{0.0, 2.0 * dt * kappa * r} * phi[j];
  }
  kinetic_adjoint(p);
  return -dt * grid_->dx() * sens;
}

AdjointResult Propagator::propagate_adjoint(const WaveFunction& p_T, const Trajectory& psi,
                                            const ControlField& control) {
  require_same_grid(p_T.grid(), *grid_);
  check_control(control);
  if (!psi.has_all_nodes() || !(psi.time() == time_)) {
    throw std::invalid_argument("adjoint propagation needs the full forward trajectory on the same time grid");
  }
  require_same_grid(*psi.grid_ptr(), *grid_);

  AdjointResult out{Trajectory(grid_, time_, true, WaveRole::costate), std::vector<double>(time_.n_steps())};
  std::vector<cplx> p(p_T.amplitudes().begin(), p_T.amplitudes().end());
  const std::size_t steps = time_.n_steps();
  std::copy(p.begin(), p.end(), out.costate.node(steps).begin());
  for (std::size_t n = steps; n-- > 0;) {
    out.step_sensitivity[n] = adjoint_step(psi.node(n), p, control.midpoint(n), true);
    std::copy(p.begin(), p.end(), out.costate.node(n).begin());
  }
  for (const auto& a : p) {
    if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) throw NumericalError("adjoint solve produced non-finite values");
  }
  ++counter_.n_backward;
  return out;
}

std::vector<double> Propagator::step_sensitivities(const Trajectory& psi, const Trajectory& costate,
                                                   const ControlField& control) {
  check_control(control);
  if (!psi.has_all_nodes() || !costate.has_all_nodes()) {
    throw std::invalid_argument("step sensitivities need full forward and costate trajectories");
  }
  if (!(psi.time() == time_) || !(costate.time() == time_)) {
    throw std::invalid_argument("trajectory time grid does not match propagator");
  }
  std::vector<double> out(time_.n_steps());
  std::vector<cplx> p(grid_->size());
  for (std::size_t n = 0; n < time_.n_steps(); ++n) {
    const auto next = costate.node(n + 1);
    std::copy(next.begin(), next.end(), p.begin());
    out[n] = adjoint_step(psi.node(n), p, control.midpoint(n), true);
  }
  return out;
}

Trajectory Propagator::propagate_sequential(const WaveFunction& psi0, ControlField& control, const NodeRule& rule,
                                            SequentialStats* stats) {
  require_same_grid(psi0.grid(), *grid_);
  check_control(control);
  const std::vector<double> previous = control.values;
  Trajectory traj(grid_, time_, true, WaveRole::state);
  std::copy(psi0.amplitudes().begin(), psi0.amplitudes().end(), traj.node(0).begin());
  const double norm0 = squared_norm(traj.node(0), grid_->dx());
  control.values[0] = rule(0, traj.node(0));

  auto& work = scratch_b_;
  const double dt = time_.dt();
  for (std::size_t n = 0; n < time_.n_steps(); ++n) {
    double guess = previous[n + 1] + (control.values[n] - previous[n]);
    int iteration = 0;
    for (;; ++iteration) {
      if (iteration >= config_.sequential_max_iterations) {
        ++counter_.n_forward;  // the partial sweep still cost (most of) a solve
        throw SequentialUpdateError("sequential update did not reach a consistent control at node " + std::to_string(n + 1));
      }
      const auto start = traj.node(n);
      std::copy(start.begin(), start.end(), work.begin());
      step(work, 0.5 * (control.values[n] + guess), dt);
      const double updated = rule(n + 1, work);
      if (!std::isfinite(updated)) throw NumericalError("sequential update produced a non-finite control");
      if (std::abs(updated - guess) <= config_.sequential_tol * (1.0 + std::abs(updated))) break;
      guess = updated;
    }
    if (stats != nullptr) {
      stats->consistency_iterations += iteration + 1;
      stats->max_consistency_iterations = std::max(stats->max_consistency_iterations, iteration + 1);
    }
    control.values[n + 1] = guess;
    check_norm(norm0, work, time_.t(n + 1));
    std::copy(work.begin(), work.end(), traj.node(n + 1).begin());
  }
  ++counter_.n_forward;
  return traj;
}

WaveFunction Propagator::terminal_costate(const WaveFunction& psi_T, const WaveFunction& psi_d) {
  const cplx overlap = inner_product(psi_d, psi_T);
  const cplx factor = cplx{0.0, 1.0} * overlap;
  std::vector<cplx> amps(psi_d.size());
  for (std::size_t j = 0; j < amps.size(); ++j) amps[j] = factor * psi_d[j];
  return WaveFunction(psi_d.grid_ptr(), std::move(amps), WaveRole::costate);
}

}  // namespace gpe_optctl
