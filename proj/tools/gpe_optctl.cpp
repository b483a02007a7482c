#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <thread>

#include "gpe_optctl/errors.hpp"
#include "gpe_optctl/experiment.hpp"

namespace fs = std::filesystem;
using namespace gpe_optctl;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

void set_log_level() {
  const char* env = std::getenv("GPE_OPTCTL_LOG");
  const std::string level = env != nullptr ? env : "info";
  if (level == "error") {
    spdlog::set_level(spdlog::level::err);
  } else if (level == "debug") {
    spdlog::set_level(spdlog::level::debug);
  } else if (level == "info") {
    spdlog::set_level(spdlog::level::info);
  } else {
    throw ConfigError("GPE_OPTCTL_LOG must be error, info or debug");
  }
}

struct Common {
  std::string config;
  std::string out = "out";
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, Common& c, bool config_required) {
  auto* opt = cmd->add_option("--config", c.config, "JSON config file");
  if (config_required) opt->required();
  cmd->add_option("--out", c.out, "output directory")->capture_default_str();
  cmd->add_option("--override", c.overrides, "dotted.key=value, repeatable")->allow_extra_args(false);
  cmd->add_option("--seed", c.seed, "random seed (overrides the config)");
}

std::vector<std::string> all_overrides(const Common& c) {
  auto o = c.overrides;
  if (c.seed) o.push_back("seed=" + std::to_string(*c.seed));
  return o;
}

ExperimentConfig load(const Common& c) {
  const nlohmann::json raw = c.config.empty() ? nlohmann::json::object() : load_json_file(c.config);
  return resolve_config(raw, all_overrides(c));
}

fs::path prepare_out(const std::string& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw std::runtime_error("cannot create " + out + ": " + ec.message());
  return fs::path(out);
}

void write_state(const StationaryState& st, double lambda, const fs::path& dir, const std::string& stem) {
  const auto& grid = st.psi.grid();
  {
    std::ofstream f(dir / (stem + ".csv"));
    if (!f) throw std::runtime_error("cannot write " + (dir / (stem + ".csv")).string());
    f << "x,re,im,density\n";
    char buf[128];
    for (std::size_t j = 0; j < grid.size(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g", grid.x(j), st.psi[j].real(), st.psi[j].imag(),
                    std::norm(st.psi[j]));
      f << buf << '\n';
    }
  }
  const nlohmann::json info{{"lambda", lambda},
                            {"energy", st.energy},
                            {"chemical_potential", st.chemical_potential},
                            {"residual", st.residual},
                            {"iterations", st.iterations},
                            {"nodes", count_nodes(st.psi)}};
  std::ofstream f(dir / (stem + ".json"));
  f << info.dump(2) << '\n';
  std::cout << info.dump() << '\n';
}

int run(int argc, char** argv) {
  CLI::App app{"Optimal control of 1D Gross-Pitaevskii dynamics (GRAPE and Krotov)"};
  app.require_subcommand(1);

  Common c;
  std::optional<double> lambda;
  int order = 1;
  auto* ground = app.add_subcommand("ground", "ground state of V(x, lambda)");
  add_common(ground, c, false);
  ground->add_option("--lambda", lambda, "control value (default: the initial-state value)");

  auto* excited = app.add_subcommand("excited", "excited stationary state of V(x, lambda)");
  add_common(excited, c, false);
  excited->add_option("--lambda", lambda, "control value (default: the desired-state value)");
  excited->add_option("--order", order, "number of nodes")->capture_default_str();

  std::string control_file;
  auto* propagate = app.add_subcommand("propagate", "solve the GPE under the guess or a given control");
  add_common(propagate, c, false);
  propagate->add_option("--control", control_file, "control.csv; the last snapshot is used");

  auto* optimize = app.add_subcommand("optimize", "run one optimizer on one problem");
  add_common(optimize, c, false);

  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  auto* sweep = app.add_subcommand("sweep", "run the cross product of a sweep file");
  add_common(sweep, c, true);
  sweep->add_option("--jobs", jobs, "parallel runs")->capture_default_str();

  std::string run_dir;
  auto* spectra = app.add_subcommand("spectra", "power spectra of control snapshots");
  spectra->add_option("--control", control_file, "control.csv written by optimize")->required();
  spectra->add_option("--out", c.out, "output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }
  set_log_level();

  if (*ground || *excited) {
    const auto cfg = load(c);
    const auto dir = prepare_out(c.out);
    auto grid = make_grid(cfg.problem.x_min, cfg.problem.x_max, cfg.problem.n_points);
    const auto pot = make_potential(cfg.problem.potential_kind, cfg.problem.coefficients);
    if (*ground) {
      const double l = lambda.value_or(cfg.problem.initial.lambda);
      write_state(ground_state(*pot, l, cfg.problem.phys, grid, cfg.problem.stationary), l, dir, "ground");
    } else {
      const double l = lambda.value_or(cfg.problem.desired.lambda);
      write_state(excited_state(*pot, l, cfg.problem.phys, grid, order, cfg.problem.stationary), l, dir, "excited");
    }
    return 0;
  }
  if (*propagate) {
    const auto cfg = load(c);
    const auto built = build_problem(cfg.problem, cfg.seed);
    ControlField control = built.guess;
    if (!control_file.empty()) {
      std::ifstream in(control_file);
      if (!in) throw ConfigError("cannot open control file " + control_file);
      TimeGrid t(1.0, 1);
      const auto snaps = read_control_csv(in, &t);
      if (!(t == built.problem.time)) throw ConfigError("control file time grid does not match the problem");
      control = ControlField(t, snaps.back().values);
    }
    Propagator prop = built.problem.make_propagator();
    const auto traj = prop.propagate_forward(built.problem.initial, control, true);
    const auto dir = prepare_out(c.out);
    write_density_map(traj, cfg.output.density_stride, dir);
    const auto final_state = traj.final_state();
    const nlohmann::json info{{"J_T", terminal_cost(final_state, built.problem.desired)},
                              {"fidelity", fidelity_overlap(final_state, built.problem.desired)},
                              {"norm_final", final_state.norm_squared()}};
    std::ofstream f(dir / "propagate.json");
    f << info.dump(2) << '\n';
    std::ofstream r(dir / "run.json");
    r << to_json(cfg).dump(2) << '\n';
    std::cout << info.dump() << '\n';
    return 0;
  }
  if (*optimize) {
    const auto cfg = load(c);
    const auto result = run_experiment(cfg);
    export_results(result, prepare_out(c.out));
    std::cout << summarize(result).dump() << '\n';
    return 0;
  }
  if (*sweep) {
    const auto runs = expand_sweep(load_json_file(c.config), all_overrides(c));
    spdlog::info("sweep: {} runs on {} workers", runs.size(), jobs);
    const auto outcomes = run_sweep(runs, prepare_out(c.out), jobs);
    bool ok = true;
    for (const auto& o : outcomes) ok = ok && o.ok;
    return ok ? 0 : kExitNumerical;
  }
  if (*spectra) {
    std::ifstream in(control_file);
    if (!in) throw ConfigError("cannot open control file " + control_file);
    TimeGrid t(1.0, 1);
    const auto snaps = read_control_csv(in, &t);
    const auto dir = prepare_out(c.out);
    std::ofstream f(dir / "spectra.csv");
    write_spectra_csv(f, spectral_history(snaps, t));
    if (!f) throw std::runtime_error("cannot write " + (dir / "spectra.csv").string());
    return 0;
  }
  return kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
