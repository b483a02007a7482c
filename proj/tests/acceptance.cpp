// Acceptance checks. Prints one PASS/FAIL line per criterion; exit code 1 if any selected
// criterion fails. `--only N` runs a single criterion, `--out DIR` keeps run artifacts.

#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>

#include "gpe_optctl/experiment.hpp"
#include "gpe_optctl/spectrum.hpp"
#include "test_support.hpp"

using namespace gpe_optctl;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

struct Verdict {
  bool pass = false;
  std::string detail;
};

fs::path g_out = "acceptance_out";
std::string g_cli;

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

ExperimentConfig splitting_config(double kappa, OptimizerKind kind) {
  auto cfg = default_config("splitting");
  cfg.problem.phys.kappa = kappa;
  cfg.optimizer = kind;
  return cfg;
}

ExperimentResult run_saved(const ExperimentConfig& cfg, const std::string& name) {
  auto result = run_experiment(cfg);
  export_results(result, g_out / name);
  return result;
}

std::vector<double> sweep_J(const RunTrace& trace, bool use_J) {
  std::vector<double> out;
  for (const auto& r : trace.rows) {
    if (r.scheme == "krotov" && (r.event == "sweep" || r.event == "forward")) out.push_back(use_J ? r.J : r.J_T);
  }
  return out;
}

// 1 -----------------------------------------------------------------------------------------
Verdict harmonic_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  auto grid = make_grid(-10.0, 10.0, 256);
  const ShakingShiftedPotential trap(1.0, 1.0, 0.0, 0.0);
  const PhysicalParams phys{1.0, 0.0};
  const auto g = ground_state(trap, 0.0, phys, grid);
  const auto e = excited_state(trap, 0.0, phys, grid, 1);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool ok = std::abs(g.energy - 0.5) < 1e-6 && std::abs(e.energy - 1.5) < 1e-6 && secs < 5.0;
  return {ok, fmt("E0 = %.10f, E1 = %.10f, %.2f s", g.energy, e.energy, secs)};
}

// 2 -----------------------------------------------------------------------------------------
Verdict gradient_fd() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  int checks = 0;
  for (const std::string preset : {"splitting", "shaking"}) {
    for (double kappa : {0.0, kPi / 2}) {
      auto spec = preset_problem(preset);
      spec.phys.kappa = kappa;
      const auto built = build_problem(spec, 0);
      auto prop = built.problem.make_propagator();
      std::mt19937_64 rng(17);
      ControlField control = built.guess;
      const auto bump = support::random_direction(control.time, rng);
      for (std::size_t n = 0; n < bump.size(); ++n) control.values[n] += 0.05 * bump[n];
      const double gamma = 1e-6;
      const auto grad = support::l2_gradient(built.problem, prop, control, gamma);
      for (int i = 0; i < 10; ++i) {
        const auto dir = support::random_direction(control.time, rng);
        worst = std::max(worst, support::directional_check(built.problem, prop, control, grad, dir, gamma).relative_error());
        ++checks;
      }
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {worst < 1e-4 && secs < 300.0, fmt("%d directions, worst relative error %.2e, %.1f s", checks, worst, secs)};
}

// 3 -----------------------------------------------------------------------------------------
Verdict splitting_convergence() {
  const auto t0 = std::chrono::steady_clock::now();
  std::string detail;
  bool ok = true;
  for (const auto kind : {OptimizerKind::grape, OptimizerKind::krotov}) {
    const auto r = run_saved(splitting_config(kPi / 2, kind), "c3_" + to_string(kind));
    // J_T is the pass criterion; the density comparison is reported alongside it.
    const auto final_state = r.final_trajectory.final_state();
    double l1 = 0.0;
    for (std::size_t j = 0; j < final_state.size(); ++j) {
      l1 += std::abs(std::norm(final_state[j]) - std::norm(r.built.problem.desired[j]));
    }
    l1 *= r.built.problem.grid->dx();
    const bool run_ok = r.optimization.J_T <= 1e-2 && r.optimization.counter.total() <= 1500;
    ok = ok && run_ok;
    detail += fmt("%s: J_T = %.3e after %ld solves, int |rho - rho_d| dx = %.3f; ", to_string(kind).c_str(),
                  r.optimization.J_T, r.optimization.counter.total(), l1);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  ok = ok && secs < 1800.0;
  return {ok, detail + fmt("%.0f s", secs)};
}

// 4 -----------------------------------------------------------------------------------------
Verdict convergence_shape() {
  const auto grape = run_experiment(splitting_config(kPi / 2, OptimizerKind::grape));
  // Plateaus: runs of >= 5 consecutive forward solves with the same accepted J_T.
  int plateaus = 0;
  int run = 0;
  double level = std::nan("");
  auto close_run = [&] {
    if (run >= 5) ++plateaus;
  };
  for (const auto& r : grape.optimization.trace.rows) {
    if (r.event == "adjoint") continue;
    if (r.J_T == level) {
      ++run;
    } else {
      close_run();
      level = r.J_T;
      run = 1;
    }
  }
  close_run();

  const auto krotov = run_experiment(splitting_config(kPi / 2, OptimizerKind::krotov));
  const auto jt = sweep_J(krotov.optimization.trace, false);
  bool strict = jt.size() > 1;
  for (std::size_t i = 1; i < jt.size(); ++i) strict = strict && jt[i] < jt[i - 1];
  return {plateaus >= 3 && strict,
          fmt("GRAPE: %d plateaus of >= 5 equal-J_T forward solves; Krotov: %zu iterations, strictly decreasing = %s",
              plateaus, jt.size() - 1, strict ? "yes" : "no")};
}

// 5 -----------------------------------------------------------------------------------------
Verdict krotov_monotonicity() {
  std::string detail;
  bool ok = true;
  for (double kappa : {kPi / 2, 2 * kPi}) {
    auto cfg = splitting_config(kappa, OptimizerKind::krotov);
    cfg.krotov.update_mode = UpdateMode::newton;
    cfg.krotov.k = 1e-3;
    cfg.krotov.stop_JT = 0.0;
    cfg.krotov.max_iterations = 100;
    cfg.krotov.max_equations = 1 + 2 * 100;
    const auto r = run_experiment(cfg);
    const auto J = sweep_J(r.optimization.trace, true);
    int longest = 0, current = 0, rises = 0;
    for (std::size_t i = 1; i < J.size(); ++i) {
      if (J[i] <= J[i - 1]) {
        longest = std::max(longest, ++current);
      } else {
        current = 0;
        ++rises;
      }
    }
    bool fallback = false;
    for (const auto& e : r.optimization.trace.events) fallback = fallback || e.find("k halved") != std::string::npos;
    const bool finite = std::isfinite(r.optimization.J_T);
    if (kappa == kPi / 2) {
      ok = ok && longest >= 100;
    } else {
      // Either monotone, or every rise episode was caught by the documented fallback.
      ok = ok && finite && (rises == 0 || fallback || r.optimization.trace.status == RunStatus::aborted);
    }
    detail += fmt("kappa = %.3f: %zu J values, longest nonincreasing run %d, rises %d, k halved = %s, J_T = %.3e; ",
                  kappa, J.size(), longest, rises, fallback ? "yes" : "no", r.optimization.J_T);
  }
  return {ok, detail};
}

// 6 -----------------------------------------------------------------------------------------
Verdict nonlinearity_trend() {
  long krotov[2] = {0, 0}, grape[2] = {0, 0};
  int i = 0;
  for (double kappa : {kPi / 2, 2 * kPi}) {
    for (const auto kind : {OptimizerKind::krotov, OptimizerKind::grape}) {
      auto cfg = splitting_config(kappa, kind);
      cfg.krotov.stop_JT = cfg.grape.stop_JT = 3e-2;
      const auto r = run_saved(cfg, fmt("c6_%s_kappa%.2f", to_string(kind).c_str(), kappa));
      const auto n = equations_to_reach(r.optimization.trace, 3e-2);
      (kind == OptimizerKind::krotov ? krotov : grape)[i] = n ? *n : -1;
    }
    ++i;
  }
  const bool reached = krotov[0] > 0 && krotov[1] > 0 && grape[0] > 0 && grape[1] > 0;
  const double grape_change = reached ? std::abs(double(grape[1] - grape[0])) / double(grape[0]) : INFINITY;
  const bool ok = reached && krotov[1] > krotov[0] && grape_change < 0.5;
  return {ok, fmt("solves to J_T = 3e-2: Krotov %ld (pi/2) vs %ld (2 pi); GRAPE %ld vs %ld (change %.0f%%)", krotov[0],
                  krotov[1], grape[0], grape[1], 100.0 * grape_change)};
}

// 7 -----------------------------------------------------------------------------------------
double final_bandwidth(const ExperimentResult& r) { return spectral_bandwidth(power_spectrum(r.optimization.control)); }

Verdict smoothness_ordering() {
  auto base = default_config("shaking");
  base.grape.search = SearchKind::bfgs;
  auto h1 = base;
  h1.optimizer = OptimizerKind::grape;
  h1.grape.norm = NormKind::H1;
  auto l2 = h1;
  l2.grape.norm = NormKind::L2;
  auto kr = base;
  kr.optimizer = OptimizerKind::krotov;
  kr.krotov.k = 5e-3;
  const auto rh1 = run_saved(h1, "c7_grape_h1");
  const auto rl2 = run_saved(l2, "c7_grape_l2");
  const auto rkr = run_saved(kr, "c7_krotov");
  const bool stopped = rh1.optimization.J_T <= 1e-2 && rl2.optimization.J_T <= 1e-2 && rkr.optimization.J_T <= 1e-2;
  const double bh1 = final_bandwidth(rh1), bl2 = final_bandwidth(rl2), bkr = final_bandwidth(rkr);
  return {stopped && bh1 < bl2 && bh1 < bkr,
          fmt("bandwidth [1/ms]: GRAPE H1 %.4f, GRAPE L2 %.4f, Krotov %.4f; final J_T %.2e / %.2e / %.2e", bh1, bl2, bkr,
              rh1.optimization.J_T, rl2.optimization.J_T, rkr.optimization.J_T)};
}

// 8 -----------------------------------------------------------------------------------------
/// Relative J_T improvement over the last 30% of the equation budget.
double late_improvement(const RunTrace& trace, long budget) {
  const long cut = budget - (3 * budget) / 10;
  double at_cut = NAN, last = NAN;
  for (const auto& r : trace.rows) {
    if (r.n_total <= cut) at_cut = r.J_T;
    last = r.J_T;
  }
  return (at_cut - last) / at_cut;
}

Verdict plateau_property() {
  const long budget = 1500;
  auto base = default_config("shaking");
  base.optimizer = OptimizerKind::grape;
  base.grape.stop_JT = 0.0;
  base.grape.max_equations = budget;
  std::string detail;
  bool grad_stalls = false;
  for (const auto norm : {NormKind::L2, NormKind::H1}) {
    auto cfg = base;
    cfg.grape.search = SearchKind::conjugate_gradient;
    cfg.grape.norm = norm;
    const auto r = run_saved(cfg, std::string("c8_grad_") + (norm == NormKind::H1 ? "h1" : "l2"));
    const double imp = late_improvement(r.optimization.trace, budget);
    grad_stalls = grad_stalls || imp < 0.01;
    detail += fmt("grad %s: J_T %.3e, late improvement %.2f%%; ", norm == NormKind::H1 ? "H1" : "L2",
                  r.optimization.J_T, 100.0 * imp);
  }
  auto cfg = base;
  cfg.grape.search = SearchKind::bfgs;
  cfg.grape.norm = NormKind::H1;
  const auto r = run_saved(cfg, "c8_bfgs_h1");
  const double imp = late_improvement(r.optimization.trace, budget);
  detail += fmt("BFGS H1: J_T %.3e, late improvement %.2f%%", r.optimization.J_T, 100.0 * imp);
  return {grad_stalls && imp >= 0.01, detail};
}

// 9 -----------------------------------------------------------------------------------------
Verdict numerical_hygiene() {
  auto spec = preset_problem("splitting");
  const auto built = build_problem(spec, 0);
  const auto& problem = built.problem;
  auto prop = problem.make_propagator();
  const auto fwd = prop.propagate_forward(problem.initial, built.guess, true);
  double norm_err = 0.0;
  for (std::size_t n = 0; n < problem.time.n_nodes(); ++n) {
    norm_err = std::max(norm_err, std::abs(fwd.state(n).norm_squared() - 1.0));
  }
  const auto back = prop.propagate_backward(fwd.final_state(), built.guess, true);
  const double reversal = fidelity_overlap(back.state(0), problem.initial);

  // dt halving against a dt/64 reference on the same guess.
  auto final_at = [&](std::size_t steps) {
    const TimeGrid time(problem.time.t_final(), steps);
    Propagator p(problem.grid, time, problem.potential, problem.phys, problem.propagator_config);
    return p.propagate_forward(problem.initial, make_guess(spec.guess, time, 0), false).final_state();
  };
  const std::size_t n0 = 250;
  const auto ref = final_at(n0 * 64);
  auto error = [&](std::size_t steps) {
    const auto w = final_at(steps);
    double e = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) e += std::norm(w[j] - ref[j]);
    return std::sqrt(e * problem.grid->dx());
  };
  const double e1 = error(n0), e2 = error(2 * n0), e3 = error(4 * n0);
  const double r1 = e1 / e2, r2 = e2 / e3;
  const bool ok = norm_err < 1e-9 && reversal >= 1.0 - 1e-8 && r1 > 3.5 && r1 < 4.5 && r2 > 3.5 && r2 < 4.5;
  return {ok, fmt("max norm drift %.1e, reversal infidelity %.1e, error ratios %.3f, %.3f", norm_err,
                  std::max(0.0, 1.0 - reversal), r1, r2)};
}

// 10 ----------------------------------------------------------------------------------------
std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Verdict determinism() {
  auto cfg = default_config("shaking");
  cfg.optimizer = OptimizerKind::hybrid;
  cfg.switch_after = 10;
  cfg.grape.max_equations = 80;
  const auto dir = g_out / "c10";
  fs::create_directories(dir);
  {
    std::ofstream f(dir / "run.json");
    f << to_json(cfg).dump(2) << '\n';
  }
  std::string texts[2];
  for (int i = 0; i < 2; ++i) {
    const auto out = dir / ("exec" + std::to_string(i));
    fs::remove_all(out);
    const std::string cmd = "GPE_OPTCTL_LOG=error \"" + g_cli + "\" optimize --config \"" + (dir / "run.json").string() +
                            "\" --out \"" + out.string() + "\" > /dev/null";
    if (std::system(cmd.c_str()) != 0) return {false, "CLI run failed: " + cmd};
    texts[i] = slurp(out / "trace.csv");
  }
  const bool same = !texts[0].empty() && texts[0] == texts[1];
  const auto rows = std::count(texts[0].begin(), texts[0].end(), '\n');
  return {same, fmt("two executions of the CLI, %ld trace lines, identical = %s", static_cast<long>(rows),
                    same ? "yes" : "no")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  int only = 0;
  std::string out = g_out.string();
  g_cli = GPE_OPTCTL_CLI;
  app.add_option("--only", only, "run only this criterion (1-10)");
  app.add_option("--out", out, "artifact directory");
  app.add_option("--cli", g_cli, "gpe-optctl executable");
  CLI11_PARSE(app, argc, argv);
  g_out = out;
  fs::create_directories(g_out);
  spdlog::set_level(spdlog::level::warn);

  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"stationary-state oracle", harmonic_oracle},
      {"gradient correctness", gradient_fd},
      {"splitting convergence", splitting_convergence},
      {"convergence shape", convergence_shape},
      {"Krotov monotonicity", krotov_monotonicity},
      {"nonlinearity trend", nonlinearity_trend},
      {"smoothness ordering", smoothness_ordering},
      {"plateau property", plateau_property},
      {"numerical hygiene", numerical_hygiene},
      {"determinism", determinism},
  };
  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only != 0 && static_cast<std::size_t>(only) != i + 1) continue;
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    all = all && v.pass;
    std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << " (" << criteria[i].first << "): " << v.detail
              << std::endl;
  }
  return all ? 0 : 1;
}
