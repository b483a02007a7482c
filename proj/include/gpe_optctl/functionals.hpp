#pragma once

#include <vector>

#include "gpe_optctl/wavefunction.hpp"

namespace gpe_optctl {

struct GrapeCostParams {
  double gamma = 1e-6;
};

enum class ShapeKind { flat, sine_ramp };

/// Update shape S(t) = k s(t) of the change penalty.
struct KrotovCostParams {
  double k = 1e-3;
  std::vector<double> shape;  // s(t) on the time nodes, each in [0, 1]
};

struct CostReport {
  double J_T = 0.0;
  double penalty = 0.0;
  double J = 0.0;
};

/// J_T = (1 - |<psi_d|psi_T>|^2) / 2
double terminal_cost(const WaveFunction& psi_T, const WaveFunction& psi_d);

/// (gamma/2) int lambda'^2 dt, with lambda' taken as the centred difference on each interval
/// [t_n, t_{n+1}]. The same three-point stencil then appears in the gradient (-gamma lambda'').
double grape_penalty(const ControlField& control, double gamma);

/// Gradient of grape_penalty with respect to each node value (not divided by dt).
std::vector<double> grape_penalty_node_gradient(const ControlField& control, double gamma);

/// int (lambda - lambda_ref)^2 / S(t) dt with S = k s(t), trapezoidal in time. Nodes where
/// S = 0 contribute nothing when lambda equals lambda_ref there and raise an error otherwise.
double krotov_penalty(const ControlField& control, const ControlField& reference, const KrotovCostParams& params);

/// s(t) on the nodes of the time grid. sine_ramp rises as sin^2(pi t / (2 t_r)) over
/// t_r = ramp_fraction * T, stays at 1, and falls symmetrically; its endpoints are exactly 0.
std::vector<double> make_shape(ShapeKind kind, double ramp_fraction, const TimeGrid& time);

}  // namespace gpe_optctl
