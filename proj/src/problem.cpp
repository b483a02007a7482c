#include "gpe_optctl/problem.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "gpe_optctl/errors.hpp"

namespace gpe_optctl {

std::string to_string(GuessKind kind) {
  switch (kind) {
    case GuessKind::linear_ramp: return "linear_ramp";
    case GuessKind::constant: return "constant";
    case GuessKind::sine_ramp: return "sine_ramp";
  }
  return "unknown";
}

std::string to_string(StateKind kind) { return kind == StateKind::ground ? "ground" : "excited"; }

GuessKind parse_guess_kind(const std::string& text) {
  if (text == "linear_ramp") return GuessKind::linear_ramp;
  if (text == "constant") return GuessKind::constant;
  if (text == "sine_ramp") return GuessKind::sine_ramp;
  throw ConfigError("unknown guess kind '" + text + "'");
}

StateKind parse_state_kind(const std::string& text) {
  if (text == "ground") return StateKind::ground;
  if (text == "excited") return StateKind::excited;
  throw ConfigError("unknown state kind '" + text + "'");
}

void ProblemSpec::validate() const {
  phys.validate();
  if (!(x_max > x_min)) throw ConfigError("problem: x_max must exceed x_min");
  if (n_points < 8) throw ConfigError("problem: n_points must be at least 8");
  if (!(t_final > 0.0)) throw ConfigError("problem: t_final must be positive");
  if (n_steps < 2) throw ConfigError("problem: n_steps must be at least 2");
  if (initial.kind == StateKind::excited && initial.order < 1) throw ConfigError("problem: excited order must be >= 1");
  if (desired.kind == StateKind::excited && desired.order < 1) throw ConfigError("problem: excited order must be >= 1");
  if (guess.kind != GuessKind::constant) {
    if (guess.lambda_start != initial.lambda || guess.lambda_end != desired.lambda) {
      throw ConfigError("problem: guess endpoints must equal the initial and desired control values");
    }
  } else if (guess.lambda_start != initial.lambda || initial.lambda != desired.lambda) {
    throw ConfigError("problem: a constant guess needs equal initial and desired control values");
  }
  if (guess.kick_periods < 1) throw ConfigError("problem: guess kick_periods must be >= 1");
  make_potential(potential_kind, coefficients);
}

ProblemSpec preset_problem(const std::string& name) {
  ProblemSpec spec;
  spec.name = name;
  if (name == "splitting" || name == "splitting-strong") {
    spec.potential_kind = "splitting_poly";
    // Wells at +-3 um for lambda = 1.
    spec.coefficients = {{"alpha", 25.0}, {"beta", 25.0 / 18.0}};
    spec.phys = {0.5, name == "splitting" ? std::numbers::pi / 2.0 : 2.0 * std::numbers::pi};
    spec.initial = {StateKind::ground, 0.0, 1};
    spec.desired = {StateKind::ground, 1.0, 1};
    spec.guess = {GuessKind::linear_ramp, 0.0, 1.0, 0.0, 1, 0.0};
    return spec;
  }
  if (name == "shaking") {
    spec.potential_kind = "shaking_shifted";
    spec.coefficients = {{"mass", 0.5}, {"omega", 2.0 * std::numbers::pi}, {"c4", 5.0}, {"c6", 0.0}};
    spec.phys = {0.5, std::numbers::pi / 2.0};
    spec.initial = {StateKind::ground, 0.0, 1};
    spec.desired = {StateKind::excited, 0.0, 1};
    spec.guess = {GuessKind::constant, 0.0, 0.0, 0.1, 1, 0.0};
    return spec;
  }
  throw ConfigError("unknown preset '" + name + "' (expected splitting, splitting-strong or shaking)");
}

ControlField make_guess(const GuessSpec& spec, const TimeGrid& time, std::uint64_t seed) {
  const double T = time.t_final();
  const double pi = std::numbers::pi;
  std::vector<double> values(time.n_nodes());
  for (std::size_t n = 0; n < values.size(); ++n) {
    const double u = time.t(n) / T;
    double base = spec.lambda_start;
    if (spec.kind == GuessKind::linear_ramp) {
      base += (spec.lambda_end - spec.lambda_start) * u;
    } else if (spec.kind == GuessKind::sine_ramp) {
      const double s = std::sin(0.5 * pi * u);
      base += (spec.lambda_end - spec.lambda_start) * s * s;
    }
    values[n] = base + spec.kick_amplitude * std::sin(2.0 * pi * spec.kick_periods * u);
  }
  if (spec.noise_amplitude != 0.0) {
    // Smooth random perturbation: a few sine modes with Gaussian weights.
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    constexpr int modes = 8;
    std::vector<double> a(modes);
    for (auto& v : a) v = normal(rng);
    for (std::size_t n = 0; n < values.size(); ++n) {
      const double u = time.t(n) / T;
      double sum = 0.0;
      for (int m = 0; m < modes; ++m) sum += a[m] * std::sin((m + 1) * pi * u) / (m + 1);
      values[n] += spec.noise_amplitude * sum;
    }
  }
  values.front() = spec.lambda_start;
  values.back() = spec.kind == GuessKind::constant ? spec.lambda_start : spec.lambda_end;
  return ControlField(time, std::move(values));
}

namespace {

StationaryState solve_state(const StateSpec& s, const PotentialFamily& pot, const ProblemSpec& spec,
                            const GridPtr& grid) {
  if (s.kind == StateKind::ground) return ground_state(pot, s.lambda, spec.phys, grid, spec.stationary);
  return excited_state(pot, s.lambda, spec.phys, grid, s.order, spec.stationary);
}

void check_state(const StationaryState& st, const StateSpec& s, const std::string& what) {
  st.psi.check_normalized(1e-10);
  if (s.kind == StateKind::excited && count_nodes(st.psi) != s.order) {
    throw NumericalError(what + " state has " + std::to_string(count_nodes(st.psi)) + " nodes, expected " +
                         std::to_string(s.order));
  }
}

}  // namespace

BuiltProblem build_problem(const ProblemSpec& spec, std::uint64_t seed) {
  spec.validate();
  auto grid = make_grid(spec.x_min, spec.x_max, spec.n_points);
  const TimeGrid time(spec.t_final, spec.n_steps);
  const PotentialPtr pot = make_potential(spec.potential_kind, spec.coefficients);

  auto initial = solve_state(spec.initial, *pot, spec, grid);
  auto desired = solve_state(spec.desired, *pot, spec, grid);
  check_state(initial, spec.initial, "initial");
  check_state(desired, spec.desired, "desired");
  WaveFunction psi0(grid, std::vector<cplx>(initial.psi.amplitudes().begin(), initial.psi.amplitudes().end()),
                    WaveRole::state);
  WaveFunction psi_d(grid, std::vector<cplx>(desired.psi.amplitudes().begin(), desired.psi.amplitudes().end()),
                     WaveRole::desired);

  ControlProblem problem{grid, time, pot, spec.phys, std::move(psi0), std::move(psi_d), spec.propagator};
  return {std::move(problem), std::move(initial), std::move(desired), make_guess(spec.guess, time, seed)};
}

}  // namespace gpe_optctl
