#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gpe_optctl/config.hpp"
#include "gpe_optctl/spectrum.hpp"

namespace gpe_optctl {

struct ExperimentResult {
  ExperimentConfig config;
  BuiltProblem built;
  OptimizationResult optimization;
  /// Forward solution under the final control (not part of the equation count).
  Trajectory final_trajectory;
};

/// Builds the problem, runs the configured optimizer and re-propagates the final control.
ExperimentResult run_experiment(const ExperimentConfig& config);

struct SpectralRow {
  long iteration = 0;
  long n_total = 0;
  std::string scheme;
  std::vector<double> power;
  double bandwidth = 0.0;
};

struct SpectralHistory {
  std::vector<double> frequency;
  std::vector<SpectralRow> rows;
};

SpectralHistory spectral_history(const std::vector<ControlSnapshot>& snapshots, const TimeGrid& time);

/// Solves counted up to the first solve whose own terminal cost is <= threshold.
std::optional<long> equations_to_reach(const RunTrace& trace, double threshold);

/// Summary figures of a finished run (also written as summary.json).
nlohmann::json summarize(const ExperimentResult& result);

/// Writes trace.csv, timing.csv, events.txt, control.csv, density.bin, meta.json,
/// final_density.csv, spectra.csv, run.json and summary.json into out_dir.
void export_results(const ExperimentResult& result, const std::filesystem::path& out_dir);

void write_control_csv(std::ostream& out, const std::vector<ControlSnapshot>& snapshots, const TimeGrid& time);
std::vector<ControlSnapshot> read_control_csv(std::istream& in, TimeGrid* time_out = nullptr);
void write_spectra_csv(std::ostream& out, const SpectralHistory& history);

/// Writes |psi(x, t)|^2 at every stride-th node as little-endian float64 rows plus meta.json.
void write_density_map(const Trajectory& trajectory, std::size_t stride, const std::filesystem::path& out_dir);

struct SweepOutcome {
  std::string name;
  bool ok = false;
  std::string error;
  nlohmann::json summary;
};

/// Runs every sweep entry in its own subdirectory of out_dir using up to `jobs` worker threads,
/// then writes sweep_summary.csv. Failing runs are reported, not rethrown.
std::vector<SweepOutcome> run_sweep(const std::vector<SweepRun>& runs, const std::filesystem::path& out_dir,
                                    unsigned jobs);

}  // namespace gpe_optctl
