#pragma once

#include <vector>

#include "gpe_optctl/propagator.hpp"

namespace gpe_optctl {

enum class NormKind { L2, H1 };

/// Search direction nabla_lambda J on the time nodes, in the L2 or H1 sense. Endpoint values
/// are always zero so the boundary values of the control stay pinned.
struct GradientField {
  std::vector<double> values;
  NormKind norm = NormKind::L2;
};

/// dJ/dlambda_n for every node (J = J_T + GRAPE penalty), from the per-step sensitivities of
/// the terminal cost. Each step uses the average of its two nodes, so a node receives half of
/// the sensitivity of each adjacent step. Endpoints are zero.
std::vector<double> node_gradient(const std::vector<double>& step_sensitivity, const ControlField& control, double gamma);

/// L2 gradient -gamma lambda'' - Re<p|dV/dlambda|psi> from node derivatives (divides by dt).
GradientField gradient_L2(const std::vector<double>& node_derivative, const TimeGrid& time);

/// L2 gradient from trajectories computed for this control.
GradientField gradient_L2(const ControlField& control, const Trajectory& psi, const Trajectory& costate,
                          Propagator& propagator, double gamma);

/// H1 gradient: solves -g'' = rhs with g(0) = g(T) = 0 (three-point stencil, tridiagonal solve).
GradientField gradient_H1(const GradientField& l2_rhs, const TimeGrid& time);

/// -u'' with the three-point stencil at interior nodes; endpoints set to zero.
std::vector<double> negative_second_difference(const std::vector<double>& u, double dt);

}  // namespace gpe_optctl
