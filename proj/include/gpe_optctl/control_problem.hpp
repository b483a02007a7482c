#pragma once

#include "gpe_optctl/propagator.hpp"

namespace gpe_optctl {

/// Everything an optimizer needs: dynamics, initial state and target.
struct ControlProblem {
  GridPtr grid;
  TimeGrid time;
  PotentialPtr potential;
  PhysicalParams phys;
  WaveFunction initial;
  WaveFunction desired;
  PropagatorConfig propagator_config;

  Propagator make_propagator() const { return Propagator(grid, time, potential, phys, propagator_config); }
};

}  // namespace gpe_optctl
