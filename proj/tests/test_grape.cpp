#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "gpe_optctl/errors.hpp"
#include "gpe_optctl/grape.hpp"
#include "test_support.hpp"

using namespace gpe_optctl;

namespace {

const BuiltProblem& splitting() {
  static const BuiltProblem built = build_problem(support::small_spec("splitting", M_PI / 2), 1);
  return built;
}

void audit_counters(const OptimizationResult& r) {
  long forward = 0, backward = 0;
  for (const auto& row : r.trace.rows) {
    if (row.event == "adjoint") {
      ++backward;
    } else {
      ++forward;
    }
    EXPECT_EQ(row.n_forward, forward);
    EXPECT_EQ(row.n_backward, backward);
    EXPECT_EQ(row.n_total, forward + backward);
  }
  EXPECT_EQ(r.counter.n_forward, forward);
  EXPECT_EQ(r.counter.n_backward, backward);
}

}  // namespace

TEST(Grape, StopsAtOnceWhenGuessIsGoodEnough) {
  GrapeConfig cfg;
  cfg.stop_JT = 1.0;
  const auto r = optimize_grape(splitting().problem, splitting().guess, cfg);
  EXPECT_EQ(r.trace.status, RunStatus::converged);
  EXPECT_EQ(r.counter.total(), 1);
  EXPECT_EQ(r.control.values, splitting().guess.values);
}

class GrapeSearch : public ::testing::TestWithParam<std::tuple<SearchKind, NormKind>> {};

TEST_P(GrapeSearch, DescendsWithPinnedEndpoints) {
  const auto [search, norm] = GetParam();
  GrapeConfig cfg;
  cfg.search = search;
  cfg.norm = norm;
  cfg.max_equations = 120;
  const auto& b = splitting();
  const auto r = optimize_grape(b.problem, b.guess, cfg);
  audit_counters(r);
  EXPECT_LE(r.counter.total(), cfg.max_equations);
  EXPECT_EQ(r.control.values.front(), b.guess.values.front());
  EXPECT_EQ(r.control.values.back(), b.guess.values.back());
  // J of the accepted control never increases.
  double last = r.trace.rows.front().J;
  for (const auto& row : r.trace.rows) {
    EXPECT_LE(row.J, last + 1e-15);
    last = row.J;
  }
  EXPECT_LT(r.J_T, 0.5 * r.trace.rows.front().J_T);
  // Every line-search trial is one forward solve and carries its own terminal cost.
  for (const auto& row : r.trace.rows) {
    if (row.event == "line_search") {
      EXPECT_TRUE(std::isfinite(row.trial_J_T));
    }
  }
}

INSTANTIATE_TEST_SUITE_P(All, GrapeSearch,
                         ::testing::Combine(::testing::Values(SearchKind::bfgs, SearchKind::conjugate_gradient),
                                            ::testing::Values(NormKind::L2, NormKind::H1)));

TEST(Grape, BfgsH1ReachesTarget) {
  GrapeConfig cfg;
  const auto& b = splitting();
  const auto r = optimize_grape(b.problem, b.guess, cfg);
  EXPECT_EQ(r.trace.status, RunStatus::converged);
  EXPECT_LE(r.J_T, 1e-2);
  EXPECT_LE(r.counter.total(), 400);
}

TEST(Grape, RespectsBudget) {
  GrapeConfig cfg;
  cfg.max_equations = 7;
  const auto r = optimize_grape(splitting().problem, splitting().guess, cfg);
  EXPECT_EQ(r.trace.status, RunStatus::budget_exhausted);
  EXPECT_LE(r.counter.total(), 7);
  EXPECT_EQ(static_cast<long>(r.trace.rows.size()), r.counter.total());
}

TEST(Grape, ConfigValidation) {
  GrapeConfig cfg;
  cfg.gamma = -1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.max_equations = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}
