#include <gtest/gtest.h>

#include <cmath>

#include "gpe_optctl/krotov.hpp"
#include "test_support.hpp"

using namespace gpe_optctl;

namespace {

const BuiltProblem& built(const std::string& preset) {
  static const BuiltProblem split = build_problem(support::small_spec("splitting", M_PI / 2), 1);
  static const BuiltProblem shake = build_problem(support::small_spec("shaking", M_PI / 2), 1);
  return preset == "splitting" ? split : shake;
}

struct Adjoint {
  Trajectory psi;
  AdjointResult adj;
};

Adjoint adjoint_of(const ControlProblem& problem, Propagator& prop, const ControlField& control) {
  auto psi = prop.propagate_forward(problem.initial, control, true);
  auto adj = prop.propagate_adjoint(Propagator::terminal_costate(psi.final_state(), problem.desired), psi, control);
  return {std::move(psi), std::move(adj)};
}

}  // namespace

TEST(Krotov, ZeroShapeLeavesControlUnchanged) {
  const auto& b = built("splitting");
  auto prop = b.problem.make_propagator();
  const auto a = adjoint_of(b.problem, prop, b.guess);
  const std::vector<double> zero(b.guess.size(), 0.0);
  const auto r = krotov_update_newton(prop, b.problem.initial, b.guess, a.adj.costate, zero, 1e-10);
  EXPECT_EQ(r.control.values, b.guess.values);
  EXPECT_EQ(r.stats.rule_evaluations, 0);
  EXPECT_GE(fidelity_overlap(r.psi.final_state(), a.psi.final_state()), 1.0 - 1e-13);
}

TEST(Krotov, ShapeMasksTheUpdate) {
  const auto& b = built("shaking");
  auto prop = b.problem.make_propagator();
  const auto a = adjoint_of(b.problem, prop, b.guess);
  auto shape = make_shape(ShapeKind::sine_ramp, 0.1, b.guess.time);
  for (std::size_t n = 0; n < shape.size(); ++n) {
    shape[n] *= 5e-3;
    if (n > shape.size() / 3 && n < shape.size() / 2) shape[n] = 0.0;
  }
  const auto r = krotov_update_explicit(prop, b.problem.initial, b.guess, a.adj.costate, shape);
  std::size_t changed = 0;
  for (std::size_t n = 0; n < shape.size(); ++n) {
    if (shape[n] == 0.0) {
      EXPECT_EQ(r.control.values[n], b.guess.values[n]) << n;
    } else if (r.control.values[n] != b.guess.values[n]) {
      ++changed;
    }
  }
  EXPECT_GT(changed, shape.size() / 2);
}

TEST(Krotov, NewtonSolvesAffineRuleInOneCorrection) {
  // The splitting family is linear in lambda, so one Newton correction is exact; the second
  // iteration only confirms it.
  const auto& b = built("splitting");
  auto prop = b.problem.make_propagator();
  const auto a = adjoint_of(b.problem, prop, b.guess);
  std::vector<double> shape = make_shape(ShapeKind::sine_ramp, 0.1, b.guess.time);
  for (auto& s : shape) s *= 1e-3;
  const auto r = krotov_update_newton(prop, b.problem.initial, b.guess, a.adj.costate, shape, 1e-12);
  EXPECT_LE(r.stats.newton_max, 2);
  EXPECT_EQ(r.stats.fallbacks, 0);
}

TEST(Krotov, NewtonResidualIsBelowTolerance) {
  const auto& b = built("shaking");
  auto prop = b.problem.make_propagator();
  const auto a = adjoint_of(b.problem, prop, b.guess);
  std::vector<double> shape = make_shape(ShapeKind::sine_ramp, 0.1, b.guess.time);
  for (auto& s : shape) s *= 5e-2;
  const double tol = 1e-10;
  const auto r = krotov_update_newton(prop, b.problem.initial, b.guess, a.adj.costate, shape, tol);
  for (std::size_t n = 0; n < shape.size(); n += 7) {
    const double lambda = r.control.values[n];
    const double residual = lambda - b.guess.values[n] -
                            shape[n] * krotov_overlap(prop, a.adj.costate.node(n), r.psi.node(n), lambda);
    EXPECT_LT(std::abs(residual), 1e-9) << n;
  }
  EXPECT_GT(r.stats.newton_mean(), 1.0);
}

TEST(Krotov, SmallStepFollowsNegativeGradient) {
  const auto& b = built("shaking");
  auto prop = b.problem.make_propagator();
  const auto a = adjoint_of(b.problem, prop, b.guess);
  std::vector<double> shape = make_shape(ShapeKind::flat, 0.1, b.guess.time);
  for (auto& s : shape) s *= 1e-6;
  const auto r = krotov_update_explicit(prop, b.problem.initial, b.guess, a.adj.costate, shape);
  const auto e = node_gradient(a.adj.step_sensitivity, b.guess, 0.0);
  double dd = 0.0, ee = 0.0, de = 0.0;
  for (std::size_t n = 0; n < e.size(); ++n) {
    const double d = r.control.values[n] - b.guess.values[n];
    dd += d * d;
    ee += e[n] * e[n];
    de += d * e[n];
  }
  EXPECT_GT(-de / std::sqrt(dd * ee), 0.99);
}

TEST(Krotov, MonotoneDescentOnSplitting) {
  KrotovConfig cfg;
  cfg.max_iterations = 25;
  cfg.stop_JT = 0.0;
  const auto& b = built("splitting");
  const auto r = optimize_krotov(b.problem, b.guess, cfg);
  EXPECT_EQ(r.trace.status, RunStatus::max_iterations);
  double last = 1.0;
  int sweeps = 0;
  for (const auto& row : r.trace.rows) {
    if (row.event != "sweep") continue;
    ++sweeps;
    EXPECT_LT(row.J_T, last);
    EXPECT_EQ(row.update_mode, "newton");
    last = row.J_T;
  }
  EXPECT_EQ(sweeps, 25);
  EXPECT_EQ(r.counter.n_forward, 26);
  EXPECT_EQ(r.counter.n_backward, 25);
  EXPECT_EQ(r.control.values.front(), b.guess.values.front());
  EXPECT_EQ(r.control.values.back(), b.guess.values.back());
}

TEST(Krotov, AdaptiveKGrowsThenFreezes) {
  KrotovConfig cfg;
  cfg.adaptive = AdaptiveK{1e-4, 1.5, 0.1};
  cfg.max_iterations = 15;
  cfg.stop_JT = 0.0;
  const auto& b = built("splitting");
  const auto r = optimize_krotov(b.problem, b.guess, cfg);
  std::vector<double> ks;
  for (const auto& row : r.trace.rows) {
    if (row.event == "sweep") ks.push_back(row.k);
  }
  ASSERT_GE(ks.size(), 2u);
  EXPECT_DOUBLE_EQ(ks.front(), 1e-4);
  EXPECT_GT(ks.back(), ks.front());
  bool frozen = false;
  for (const auto& e : r.trace.events) frozen = frozen || e.find("k frozen") != std::string::npos;
  EXPECT_TRUE(frozen);
}

TEST(Krotov, HybridLimits) {
  const auto& b = built("splitting");
  KrotovConfig kcfg;
  GrapeConfig gcfg;
  kcfg.max_equations = gcfg.max_equations = 200;

  const auto grape = optimize_grape(b.problem, b.guess, gcfg);
  const auto h0 = optimize_hybrid(b.problem, b.guess, kcfg, gcfg, 0);
  EXPECT_EQ(h0.control.values, grape.control.values);
  EXPECT_EQ(h0.counter.total(), grape.counter.total());

  const auto krotov = optimize_krotov(b.problem, b.guess, kcfg);
  const auto hinf = optimize_hybrid(b.problem, b.guess, kcfg, gcfg, 1000000);
  EXPECT_EQ(hinf.control.values, krotov.control.values);
  EXPECT_EQ(hinf.counter.total(), krotov.counter.total());

  const auto h3 = optimize_hybrid(b.problem, b.guess, kcfg, gcfg, 3);
  // One forward solve and three adjoint/sweep pairs, then GRAPE starts with the adjoint of the
  // handed-over trajectory.
  ASSERT_GT(h3.trace.rows.size(), 8u);
  EXPECT_EQ(h3.trace.rows[6].scheme, "krotov");
  EXPECT_EQ(h3.trace.rows[6].event, "sweep");
  EXPECT_EQ(h3.trace.rows[7].scheme, "grape");
  EXPECT_EQ(h3.trace.rows[7].event, "adjoint");
  EXPECT_EQ(h3.trace.rows[7].iteration, 3);
}

TEST(Krotov, OversizedStepFallsBackByHalvingK) {
  KrotovConfig cfg;
  cfg.k = 0.2;
  cfg.max_iterations = 4;
  cfg.stop_JT = 0.0;
  cfg.max_halvings = 10;
  const auto& b = built("splitting");
  const auto r = optimize_krotov(b.problem, b.guess, cfg);
  int halved = 0;
  for (const auto& e : r.trace.events) halved += e.find("k halved") != std::string::npos;
  EXPECT_GT(halved, 0);
  EXPECT_TRUE(std::isfinite(r.J_T));
  EXPECT_EQ(static_cast<long>(r.trace.rows.size()), r.counter.total());
}
