#include "gpe_optctl/gradient.hpp"

#include <stdexcept>

#include "gpe_optctl/functionals.hpp"

namespace gpe_optctl {

std::vector<double> node_gradient(const std::vector<double>& step_sensitivity, const ControlField& control,
                                  double gamma) {
  const std::size_t nodes = control.size();
  if (step_sensitivity.size() + 1 != nodes) throw std::invalid_argument("sensitivity length does not match control");
  std::vector<double> g = grape_penalty_node_gradient(control, gamma);
  for (std::size_t n = 0; n + 1 < nodes; ++n) {
    g[n] += 0.5 * step_sensitivity[n];
    g[n + 1] += 0.5 * step_sensitivity[n];
  }
  g.front() = 0.0;
  g.back() = 0.0;
  return g;
}

GradientField gradient_L2(const std::vector<double>& node_derivative, const TimeGrid& time) {
  GradientField out{node_derivative, NormKind::L2};
  const double inv_dt = 1.0 / time.dt();
  for (auto& v : out.values) v *= inv_dt;
  out.values.front() = 0.0;
  out.values.back() = 0.0;
  return out;
}

GradientField gradient_L2(const ControlField& control, const Trajectory& psi, const Trajectory& costate,
                          Propagator& propagator, double gamma) {
  const auto sens = propagator.step_sensitivities(psi, costate, control);
  return gradient_L2(node_gradient(sens, control, gamma), control.time);
}

GradientField gradient_H1(const GradientField& l2_rhs, const TimeGrid& time) {
  const auto& rhs = l2_rhs.values;
  const std::size_t nodes = rhs.size();
  GradientField out{std::vector<double>(nodes, 0.0), NormKind::H1};
  if (nodes < 3) return out;
  // Thomas algorithm for tridiag(-1, 2, -1) u = dt^2 rhs on the interior nodes.
  const double h2 = time.dt() * time.dt();
  const std::size_t m = nodes - 2;
  std::vector<double> c(m);
  std::vector<double> d(m);
  double denom = 2.0;
  c[0] = -1.0 / denom;
  d[0] = h2 * rhs[1] / denom;
  for (std::size_t i = 1; i < m; ++i) {
    denom = 2.0 + c[i - 1];
    c[i] = -1.0 / denom;
    d[i] = (h2 * rhs[i + 1] + d[i - 1]) / denom;
  }
  out.values[m] = d[m - 1];
  for (std::size_t i = m - 1; i-- > 0;) out.values[i + 1] = d[i] - c[i] * out.values[i + 2];
  return out;
}

std::vector<double> negative_second_difference(const std::vector<double>& u, double dt) {
  std::vector<double> out(u.size(), 0.0);
  const double inv = 1.0 / (dt * dt);
  for (std::size_t n = 1; n + 1 < u.size(); ++n) out[n] = -(u[n + 1] - 2.0 * u[n] + u[n - 1]) * inv;
  return out;
}

}  // namespace gpe_optctl
