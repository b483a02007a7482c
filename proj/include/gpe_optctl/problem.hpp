#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "gpe_optctl/control_problem.hpp"
#include "gpe_optctl/stationary.hpp"

namespace gpe_optctl {

enum class GuessKind { linear_ramp, constant, sine_ramp };

/// Initial control. The base curve joins lambda_start and lambda_end; an optional sine kick
/// A sin(2 pi m t / T) and seeded noise (zero at both ends) can be added on top.
struct GuessSpec {
  GuessKind kind = GuessKind::linear_ramp;
  double lambda_start = 0.0;
  double lambda_end = 1.0;
  double kick_amplitude = 0.0;
  int kick_periods = 1;
  double noise_amplitude = 0.0;
};

enum class StateKind { ground, excited };

struct StateSpec {
  StateKind kind = StateKind::ground;
  double lambda = 0.0;
  int order = 1;  // only for excited states
};

struct ProblemSpec {
  std::string name;
  std::string potential_kind;
  std::map<std::string, double> coefficients;
  PhysicalParams phys;
  double x_min = -10.0;
  double x_max = 10.0;
  std::size_t n_points = 256;
  double t_final = 2.0;
  std::size_t n_steps = 2000;
  StateSpec initial;
  StateSpec desired;
  GuessSpec guess;
  StationaryOptions stationary;
  PropagatorConfig propagator;

  void validate() const;
};

/// Built-in problems: "splitting", "splitting-strong" and "shaking".
ProblemSpec preset_problem(const std::string& name);

ControlField make_guess(const GuessSpec& spec, const TimeGrid& time, std::uint64_t seed);

struct BuiltProblem {
  ControlProblem problem;
  StationaryState initial;
  StationaryState desired;
  ControlField guess;
};

/// Computes the stationary states, checks their normalization and shape, and samples the guess.
BuiltProblem build_problem(const ProblemSpec& spec, std::uint64_t seed);

std::string to_string(GuessKind kind);
std::string to_string(StateKind kind);
GuessKind parse_guess_kind(const std::string& text);
StateKind parse_state_kind(const std::string& text);

}  // namespace gpe_optctl
