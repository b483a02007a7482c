#pragma once

#include <chrono>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "gpe_optctl/propagator.hpp"

namespace gpe_optctl {

/// One row per solved equation. J_T and J describe the currently accepted control; trial_J_T is
/// the terminal cost produced by this particular solve (NaN for adjoint solves).
struct TraceRow {
  long iteration = 0;
  std::string scheme;  // "grape" or "krotov"
  std::string event;   // "forward", "line_search", "sweep", "adjoint"
  long n_forward = 0;
  long n_backward = 0;
  long n_total = 0;
  double J_T = 0.0;
  double J = 0.0;
  double trial_J_T = std::numeric_limits<double>::quiet_NaN();
  double step = std::numeric_limits<double>::quiet_NaN();
  double grad_norm = std::numeric_limits<double>::quiet_NaN();
  double k = std::numeric_limits<double>::quiet_NaN();
  std::string update_mode;
  double newton_mean = std::numeric_limits<double>::quiet_NaN();
  int newton_max = 0;
  double wall_time = 0.0;  // seconds since the run started; not part of trace.csv
};

struct ControlSnapshot {
  long iteration = 0;
  long n_total = 0;
  std::string scheme;
  std::vector<double> values;
};

enum class RunStatus { converged, budget_exhausted, max_iterations, line_search_failed, gradient_vanished, aborted };

std::string to_string(RunStatus status);

struct RunTrace {
  std::vector<TraceRow> rows;
  std::vector<ControlSnapshot> snapshots;
  std::vector<std::string> events;
  RunStatus status = RunStatus::max_iterations;
};

/// Result shared by all optimizers.
struct OptimizationResult {
  ControlField control;
  RunTrace trace;
  EquationCounter counter;
  double J_T = 0.0;
  double J = 0.0;
};

/// Appends rows and snapshots while an optimizer runs; counters come from the propagator.
class TraceRecorder {
 public:
  TraceRecorder(RunTrace& trace, const Propagator& propagator, int snapshot_every);

  void record(TraceRow row);
  void snapshot(long iteration, const std::string& scheme, const ControlField& control, bool force = false);
  void event(std::string text) { trace_.events.push_back(std::move(text)); }
  RunTrace& trace() { return trace_; }

 private:
  RunTrace& trace_;
  const Propagator& propagator_;
  int snapshot_every_;
  std::chrono::steady_clock::time_point start_;
};

/// Writes the deterministic columns of the trace (no wall time).
void write_trace_csv(std::ostream& out, const RunTrace& trace);
void write_timing_csv(std::ostream& out, const RunTrace& trace);

inline constexpr const char* kTraceCsvHeader =
    "iteration,scheme,event,n_forward,n_backward,n_total,J_T,J,trial_J_T,step,grad_norm,k,update_mode,newton_mean,newton_max";

}  // namespace gpe_optctl
