#include "gpe_optctl/trace.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace gpe_optctl {

std::string to_string(RunStatus status) {
  switch (status) {
    case RunStatus::converged: return "converged";
    case RunStatus::budget_exhausted: return "budget_exhausted";
    case RunStatus::max_iterations: return "max_iterations";
    case RunStatus::line_search_failed: return "line_search_failed";
    case RunStatus::gradient_vanished: return "gradient_vanished";
    case RunStatus::aborted: return "aborted";
  }
  return "unknown";
}

TraceRecorder::TraceRecorder(RunTrace& trace, const Propagator& propagator, int snapshot_every)
    : trace_(trace),
      propagator_(propagator),
      snapshot_every_(snapshot_every),
      start_(std::chrono::steady_clock::now()) {}

void TraceRecorder::record(TraceRow row) {
  const auto& c = propagator_.counter();
  row.n_forward = c.n_forward;
  row.n_backward = c.n_backward;
  row.n_total = c.total();
  row.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  trace_.rows.push_back(std::move(row));
}

void TraceRecorder::snapshot(long iteration, const std::string& scheme, const ControlField& control, bool force) {
  if (!force && (snapshot_every_ <= 0 || iteration % snapshot_every_ != 0)) return;
  if (!trace_.snapshots.empty() && trace_.snapshots.back().iteration == iteration &&
      trace_.snapshots.back().scheme == scheme) {
    trace_.snapshots.back().values = control.values;
    return;
  }
  trace_.snapshots.push_back({iteration, propagator_.counter().total(), scheme, control.values});
}

namespace {

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_trace_csv(std::ostream& out, const RunTrace& trace) {
  out << kTraceCsvHeader << '\n';
  for (const auto& r : trace.rows) {
    out << r.iteration << ',' << r.scheme << ',' << r.event << ',' << r.n_forward << ',' << r.n_backward << ','
        << r.n_total << ',' << fmt(r.J_T) << ',' << fmt(r.J) << ',' << fmt(r.trial_J_T) << ',' << fmt(r.step) << ','
        << fmt(r.grad_norm) << ',' << fmt(r.k) << ',' << r.update_mode << ',' << fmt(r.newton_mean) << ','
        << r.newton_max << '\n';
  }
}

void write_timing_csv(std::ostream& out, const RunTrace& trace) {
  out << "n_total,wall_time_s\n";
  for (const auto& r : trace.rows) out << r.n_total << ',' << fmt(r.wall_time) << '\n';
}

}  // namespace gpe_optctl
