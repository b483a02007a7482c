#include "gpe_optctl/functionals.hpp"

#include <cmath>
#include <numbers>

#include "gpe_optctl/errors.hpp"

namespace gpe_optctl {

double terminal_cost(const WaveFunction& psi_T, const WaveFunction& psi_d) {
  return 0.5 * (1.0 - fidelity_overlap(psi_T, psi_d));
}

double grape_penalty(const ControlField& control, double gamma) {
  const double dt = control.time.dt();
  double sum = 0.0;
  for (std::size_t n = 0; n + 1 < control.size(); ++n) {
    const double slope = (control.values[n + 1] - control.values[n]) / dt;
    sum += slope * slope;
  }
  return 0.5 * gamma * sum * dt;
}

std::vector<double> grape_penalty_node_gradient(const ControlField& control, double gamma) {
  const double dt = control.time.dt();
  const auto& v = control.values;
  const std::size_t n = v.size();
  std::vector<double> g(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double d = gamma * (v[i + 1] - v[i]) / dt;
    g[i] -= d;
    g[i + 1] += d;
  }
  return g;
}

double krotov_penalty(const ControlField& control, const ControlField& reference, const KrotovCostParams& params) {
  if (!(control.time == reference.time)) throw std::invalid_argument("control and reference use different time grids");
  if (params.shape.size() != control.size()) throw std::invalid_argument("shape length does not match control");
  const double dt = control.time.dt();
  const std::size_t last = control.size() - 1;
  double sum = 0.0;
  for (std::size_t n = 0; n <= last; ++n) {
    const double diff = control.values[n] - reference.values[n];
    if (diff == 0.0) continue;
    const double s = params.k * params.shape[n];
    if (!(s > 0.0)) {
      throw NumericalError("control changed at node " + std::to_string(n) + " where the update shape is zero");
    }
    const double weight = (n == 0 || n == last) ? 0.5 : 1.0;
    sum += weight * diff * diff / s;
  }
  return sum * dt;
}

std::vector<double> make_shape(ShapeKind kind, double ramp_fraction, const TimeGrid& time) {
  std::vector<double> s(time.n_nodes(), 1.0);
  if (kind == ShapeKind::flat) return s;
  if (!(ramp_fraction >= 0.0 && ramp_fraction <= 0.5)) throw ConfigError("ramp_fraction must lie in [0, 0.5]");
  const double T = time.t_final();
  const double ramp = ramp_fraction * T;
  for (std::size_t n = 0; n < s.size(); ++n) {
    const double t = time.t(n);
    const double edge = std::min(t, T - t);
    if (edge < ramp) {
      const double v = std::sin(0.5 * std::numbers::pi * edge / ramp);
      s[n] = v * v;
    }
  }
  s.front() = 0.0;
  s.back() = 0.0;
  return s;
}

}  // namespace gpe_optctl
