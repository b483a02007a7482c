#pragma once

#include <functional>
#include <optional>

namespace gpe_optctl {

struct LineSearchConfig {
  /// Sufficient-decrease constant; the accepted step must satisfy f(a) <= f(0) + c1 a f'(0).
  double c1 = 1e-4;
  /// Curvature constant, checked once the gradient at the accepted point is known.
  double c2 = 0.9;
  int max_trials = 20;
  /// Refinement stops once the bracket is narrower than rel_tol times the best step.
  double rel_tol = 0.05;
  double expand = 2.0;
  /// Largest control change (max norm) of a first trial step when no step history exists.
  double initial_step_inf = 0.1;
};

struct LineSearchResult {
  bool success = false;
  double step = 0.0;
  double value = 0.0;
  int trials = 0;
  bool out_of_budget = false;
};

/// Approximate minimization of f along a descent direction using function values only.
///
/// `f` returns nullopt for an inadmissible step (treated as +inf). `may_evaluate` is asked
/// before every evaluation and stops the search when it returns false. The search expands or
/// contracts from `initial_step` until a minimum is bracketed, then refines the bracket by
/// safeguarded parabolic interpolation.
LineSearchResult line_minimize(const std::function<std::optional<double>(double)>& f, double f0, double slope0,
                               double initial_step, const LineSearchConfig& config,
                               const std::function<bool()>& may_evaluate);

}  // namespace gpe_optctl
