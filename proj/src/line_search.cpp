#include "gpe_optctl/line_search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gpe_optctl {
namespace {

struct Point {
  double a;
  double f;
};

constexpr double kGolden = 0.3819660112501051;

}  // namespace

LineSearchResult line_minimize(const std::function<std::optional<double>(double)>& f, double f0, double slope0,
                               double initial_step, const LineSearchConfig& config,
                               const std::function<bool()>& may_evaluate) {
  LineSearchResult result;
  const double inf = std::numeric_limits<double>::infinity();
  Point best{0.0, f0};

  auto eval = [&](double a) -> std::optional<double> {
    if (result.trials >= config.max_trials) return std::nullopt;
    if (!may_evaluate()) {
      result.out_of_budget = true;
      return std::nullopt;
    }
    ++result.trials;
    const auto v = f(a);
    const double value = (v && std::isfinite(*v)) ? *v : inf;
    if (value < best.f) best = {a, value};
    return value;
  };

  auto finish = [&]() {
    result.step = best.a;
    result.value = best.f;
    result.success = best.a > 0.0 && best.f <= f0 + config.c1 * best.a * slope0;
    return result;
  };

  if (!(slope0 < 0.0) || !(initial_step > 0.0)) return finish();

  // Bracketing: a < b < c with f(b) < f(a) and f(b) <= f(c).
  Point a{0.0, f0};
  Point b{};
  Point c{};
  const auto first = eval(initial_step);
  if (!first) return finish();
  if (*first < f0) {
    b = {initial_step, *first};
    for (;;) {
      const double next = b.a * config.expand;
      const auto fn = eval(next);
      if (!fn) return finish();
      if (*fn >= b.f) {
        c = {next, *fn};
        break;
      }
      a = b;
      b = {next, *fn};
    }
  } else {
    c = {initial_step, *first};
    for (;;) {
      double trial = 0.5 * c.a;
      if (std::isfinite(c.f)) {
        const double curv = c.f - f0 - slope0 * c.a;
        if (curv > 0.0) trial = std::clamp(-slope0 * c.a * c.a / (2.0 * curv), 0.1 * c.a, 0.5 * c.a);
      }
      const auto fn = eval(trial);
      if (!fn) return finish();
      if (*fn < f0) {
        b = {trial, *fn};
        break;
      }
      c = {trial, *fn};
      if (c.a < 1e-14 * initial_step) return finish();
    }
  }

  // Refinement inside the bracket.
  while (c.a - a.a > config.rel_tol * b.a) {
    double u = std::numeric_limits<double>::quiet_NaN();
    if (std::isfinite(c.f)) {
      const double r = (b.a - a.a) * (b.f - c.f);
      const double q = (b.a - c.a) * (b.f - a.f);
      const double den = 2.0 * (r - q);
      if (den != 0.0) u = b.a - ((b.a - a.a) * r - (b.a - c.a) * q) / den;
    }
    const double width = c.a - a.a;
    const bool usable = std::isfinite(u) && u > a.a + 0.01 * width && u < c.a - 0.01 * width &&
                        std::abs(u - b.a) > 0.01 * width;
    if (!usable) {
      u = (c.a - b.a > b.a - a.a) ? b.a + kGolden * (c.a - b.a) : b.a - kGolden * (b.a - a.a);
    }
    const auto fu = eval(u);
    if (!fu) break;
    if (*fu < b.f) {
      if (u > b.a) {
        a = b;
      } else {
        c = b;
      }
      b = {u, *fu};
    } else if (u > b.a) {
      c = {u, *fu};
    } else {
      a = {u, *fu};
    }
  }
  return finish();
}

}  // namespace gpe_optctl
