#include "gpe_optctl/experiment.hpp"

#include <spdlog/spdlog.h>

#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "gpe_optctl/errors.hpp"

namespace gpe_optctl {

namespace fs = std::filesystem;
using nlohmann::json;

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  BuiltProblem built = build_problem(config.problem, config.seed);
  const auto& problem = built.problem;
  spdlog::info("{}: initial mu = {:.6f}, desired mu = {:.6f}", config.problem.name,
               built.initial.chemical_potential, built.desired.chemical_potential);

  OptimizationResult opt = [&] {
    switch (config.optimizer) {
      case OptimizerKind::grape: return optimize_grape(problem, built.guess, config.grape);
      case OptimizerKind::krotov: return optimize_krotov(problem, built.guess, config.krotov);
      case OptimizerKind::hybrid:
        return optimize_hybrid(problem, built.guess, config.krotov, config.grape, config.switch_after);
    }
    throw ConfigError("unknown optimizer kind");
  }();
  spdlog::info("{} / {}: status {}, J_T = {:.6e} after {} solves", config.problem.name, to_string(config.optimizer),
               to_string(opt.trace.status), opt.J_T, opt.counter.total());

  Propagator replay = problem.make_propagator();
  Trajectory final_traj = replay.propagate_forward(problem.initial, opt.control, true);
  return {config, std::move(built), std::move(opt), std::move(final_traj)};
}

SpectralHistory spectral_history(const std::vector<ControlSnapshot>& snapshots, const TimeGrid& time) {
  SpectralHistory out;
  for (const auto& s : snapshots) {
    const auto spec = power_spectrum(ControlField(time, s.values));
    if (out.frequency.empty()) out.frequency = spec.frequency;
    out.rows.push_back({s.iteration, s.n_total, s.scheme, spec.power, spectral_bandwidth(spec)});
  }
  return out;
}

std::optional<long> equations_to_reach(const RunTrace& trace, double threshold) {
  for (const auto& r : trace.rows) {
    if (!std::isnan(r.trial_J_T) && r.trial_J_T <= threshold) return r.n_total;
  }
  return std::nullopt;
}

json summarize(const ExperimentResult& r) {
  const auto& opt = r.optimization;
  const auto& problem = r.built.problem;
  const auto final_state = r.final_trajectory.final_state();
  const auto spec = power_spectrum(opt.control);
  auto reach = [&](double thr) -> json {
    const auto n = equations_to_reach(opt.trace, thr);
    return n ? json(*n) : json(nullptr);
  };
  return json{{"problem", r.config.problem.name},
              {"optimizer", to_string(r.config.optimizer)},
              {"status", to_string(opt.trace.status)},
              {"J_T", opt.J_T},
              {"J", opt.J},
              {"J_T_guess", opt.trace.rows.empty() ? json(nullptr) : json(opt.trace.rows.front().trial_J_T)},
              {"n_forward", opt.counter.n_forward},
              {"n_backward", opt.counter.n_backward},
              {"n_total", opt.counter.total()},
              {"equations_to_3e-2", reach(3e-2)},
              {"equations_to_1e-2", reach(1e-2)},
              {"fidelity", fidelity_overlap(final_state, problem.desired)},
              {"bandwidth", spectral_bandwidth(spec)},
              {"initial_energy", r.built.initial.energy},
              {"desired_energy", r.built.desired.energy},
              {"events", opt.trace.events}};
}

void write_control_csv(std::ostream& out, const std::vector<ControlSnapshot>& snapshots, const TimeGrid& time) {
  out << "iteration,scheme,n_total,t,lambda\n";
  char buf[64];
  for (const auto& s : snapshots) {
    for (std::size_t n = 0; n < s.values.size(); ++n) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g", time.t(n), s.values[n]);
      out << s.iteration << ',' << s.scheme << ',' << s.n_total << ',' << buf << '\n';
    }
  }
}

std::vector<ControlSnapshot> read_control_csv(std::istream& in, TimeGrid* time_out) {
  std::string line;
  if (!std::getline(in, line) || line != "iteration,scheme,n_total,t,lambda") {
    throw ConfigError("control file does not start with the header iteration,scheme,n_total,t,lambda");
  }
  std::vector<ControlSnapshot> out;
  std::vector<double> times;
  double last_t = 0.0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string it, scheme, nt, t, lambda;
    if (!std::getline(ss, it, ',') || !std::getline(ss, scheme, ',') || !std::getline(ss, nt, ',') ||
        !std::getline(ss, t, ',') || !std::getline(ss, lambda, ',')) {
      throw ConfigError("malformed control row: " + line);
    }
    const long iteration = std::stol(it);
    const long n_total = std::stol(nt);
    const double tv = std::stod(t);
    if (out.empty() || out.back().iteration != iteration || out.back().scheme != scheme || tv < last_t) {
      out.push_back({iteration, n_total, scheme, {}});
    }
    if (out.size() == 1) times.push_back(tv);
    out.back().values.push_back(std::stod(lambda));
    last_t = tv;
  }
  if (out.empty()) throw ConfigError("control file holds no samples");
  for (const auto& s : out) {
    if (s.values.size() != times.size()) throw ConfigError("control snapshots have different lengths");
  }
  if (times.size() < 3) throw ConfigError("control snapshots need at least three samples");
  if (time_out != nullptr) *time_out = TimeGrid(times.back(), times.size() - 1);
  return out;
}

void write_spectra_csv(std::ostream& out, const SpectralHistory& h) {
  char buf[32];
  out << "iteration,scheme,n_total,bandwidth";
  for (double f : h.frequency) {
    std::snprintf(buf, sizeof buf, "%.10g", f);
    out << ",f=" << buf;
  }
  out << '\n';
  for (const auto& r : h.rows) {
    std::snprintf(buf, sizeof buf, "%.17g", r.bandwidth);
    out << r.iteration << ',' << r.scheme << ',' << r.n_total << ',' << buf;
    for (double p : r.power) {
      std::snprintf(buf, sizeof buf, "%.17g", p);
      out << ',' << buf;
    }
    out << '\n';
  }
}

namespace {

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream f(path, mode);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  return f;
}

void check_written(std::ofstream& f, const fs::path& path) {
  f.flush();
  if (!f) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

void write_density_map(const Trajectory& traj, std::size_t stride, const fs::path& out_dir) {
  static_assert(std::endian::native == std::endian::little, "density.bin is written in native little-endian order");
  const auto& time = traj.time();
  const auto& grid = *traj.grid_ptr();
  std::vector<double> t_values;
  const auto bin_path = out_dir / "density.bin";
  auto bin = open_out(bin_path, std::ios::out | std::ios::binary);
  std::vector<double> row(grid.size());
  for (std::size_t n = 0; n < time.n_nodes(); n += stride) {
    const auto psi = traj.node(n);
    for (std::size_t j = 0; j < row.size(); ++j) row[j] = std::norm(psi[j]);
    bin.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(double)));
    t_values.push_back(time.t(n));
  }
  check_written(bin, bin_path);
  const json meta{{"file", "density.bin"},
                  {"dtype", "float64"},
                  {"byte_order", "little"},
                  {"layout", "row-major [time][x]"},
                  {"n_times", t_values.size()},
                  {"n_points", grid.size()},
                  {"x_min", grid.x(0)},
                  {"dx", grid.dx()},
                  {"time_stride", stride},
                  {"t", t_values}};
  const auto meta_path = out_dir / "meta.json";
  auto m = open_out(meta_path);
  m << meta.dump(2) << '\n';
  check_written(m, meta_path);
}

void export_results(const ExperimentResult& r, const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create " + out_dir.string() + ": " + ec.message());
  const auto& opt = r.optimization;
  const auto& time = r.built.problem.time;

  auto write = [&](const std::string& name, const auto& fn) {
    const auto path = out_dir / name;
    auto f = open_out(path);
    fn(f);
    check_written(f, path);
  };
  write("trace.csv", [&](std::ostream& o) { write_trace_csv(o, opt.trace); });
  write("timing.csv", [&](std::ostream& o) { write_timing_csv(o, opt.trace); });
  write("events.txt", [&](std::ostream& o) {
    for (const auto& e : opt.trace.events) o << e << '\n';
  });
  write("control.csv", [&](std::ostream& o) { write_control_csv(o, opt.trace.snapshots, time); });
  write("spectra.csv", [&](std::ostream& o) { write_spectra_csv(o, spectral_history(opt.trace.snapshots, time)); });
  write("final_density.csv", [&](std::ostream& o) {
    const auto& grid = *r.built.problem.grid;
    const auto final_state = r.final_trajectory.final_state();
    char buf[128];
    o << "x,initial,desired,final\n";
    for (std::size_t j = 0; j < grid.size(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g", grid.x(j), std::norm(r.built.problem.initial[j]),
                    std::norm(r.built.problem.desired[j]), std::norm(final_state[j]));
      o << buf << '\n';
    }
  });
  write_density_map(r.final_trajectory, r.config.output.density_stride, out_dir);
  write("run.json", [&](std::ostream& o) { o << to_json(r.config).dump(2) << '\n'; });
  write("summary.json", [&](std::ostream& o) { o << summarize(r).dump(2) << '\n'; });
}

std::vector<SweepOutcome> run_sweep(const std::vector<SweepRun>& runs, const fs::path& out_dir, unsigned jobs) {
  std::vector<SweepOutcome> outcomes(runs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= runs.size()) return;
      auto& o = outcomes[i];
      o.name = runs[i].name;
      try {
        const auto result = run_experiment(runs[i].config);
        const auto dir = out_dir / runs[i].name;
        export_results(result, dir);
        o.summary = summarize(result);
        o.ok = true;
      } catch (const std::exception& e) {
        o.error = e.what();
        spdlog::error("{}: {}", runs[i].name, e.what());
      }
    }
  };
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(runs.size())));
  std::vector<std::thread> threads;
  for (unsigned j = 1; j < jobs; ++j) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  const auto path = out_dir / "sweep_summary.csv";
  auto f = open_out(path);
  f << "name,overrides,ok,status,J_T,n_total,equations_to_3e-2,equations_to_1e-2,bandwidth,error\n";
  auto field = [](const json& s, const char* key) -> std::string {
    if (!s.contains(key) || s[key].is_null()) return "";
    return s[key].is_string() ? s[key].get<std::string>() : s[key].dump();
  };
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& o = outcomes[i];
    std::string overrides;
    for (const auto& a : runs[i].assignments) overrides += (overrides.empty() ? "" : ";") + a;
    std::string error = o.error;
    for (auto& c : error) {
      if (c == '"') c = '\'';
    }
    f << o.name << ",\"" << overrides << "\"," << (o.ok ? 1 : 0) << ',' << field(o.summary, "status") << ','
      << field(o.summary, "J_T") << ',' << field(o.summary, "n_total") << ','
      << field(o.summary, "equations_to_3e-2") << ',' << field(o.summary, "equations_to_1e-2") << ','
      << field(o.summary, "bandwidth") << ",\"" << error << "\"\n";
  }
  check_written(f, path);
  return outcomes;
}

}  // namespace gpe_optctl
