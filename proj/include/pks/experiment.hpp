#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "pks/config.hpp"
#include "pks/diagnostics.hpp"
#include "pks/grid.hpp"
#include "pks/scheme.hpp"

namespace pks {

/// A step failed inside a run; carries the step being attempted.
class SimulationError : public std::runtime_error {
 public:
  SimulationError(long step, double time, const std::string& cause, StepReport report);
  long step() const { return step_; }
  const StepReport& report() const { return report_; }

 private:
  long step_;
  StepReport report_;
};

struct RunObserver {
  /// Called with the initial state and after every accepted step.
  std::function<void(const SimState&)> on_state;
  std::function<void(const DiagnosticsRecord&)> on_record;
};

struct RunSummary {
  SimState final_state;
  long steps;
  /// Size of the last step; smaller than dt when T is not a multiple of dt.
  double last_dt;
  bool shortened_last_step;
  DiagnosticsRecord initial;
  DiagnosticsRecord final;
};

Grid make_grid(const RunConfig& cfg, int n);
/// Initial density and chemoattractant on `grid`.
std::pair<CellField, CellField> initial_fields(const RunConfig& cfg, const Grid& grid);
SourceTerms make_sources(const RunConfig& cfg, const SchemeParams& params);

/// Integrates from t = 0 to T on an N^dim grid with step dt. Throws
/// SimulationError if a step fails.
RunSummary simulate(const RunConfig& cfg, int n, double dt, const RunObserver& observer = {});

/// `run`: diagnostics.csv and the requested snapshots in cfg.output_dir.
RunSummary run(const RunConfig& cfg, std::ostream& log);

struct ConvergenceRow {
  double h = 0.0;
  double dt = 0.0;
  double err_rho_linf = 0.0;
  double err_phi_linf = 0.0;
  double order_rho = 0.0;  // NaN on the first row
  double order_phi = 0.0;
};
using ConvergenceTable = std::vector<ConvergenceRow>;

/// Fills the order columns with log2(err(prev) / err(this)) scaled by the
/// actual refinement ratio log(h_prev / h).
void compute_orders(ConvergenceTable& table);

/// `sweep`: one manufactured run per N with dt = ratio * h; writes
/// convergence.csv in cfg.output_dir.
ConvergenceTable sweep(const RunConfig& cfg, std::ostream& log);

/// Header `h,dt,err_rho_linf,err_phi_linf,order_rho,order_phi`.
void write_convergence(std::ostream& out, const ConvergenceTable& table);
void write_convergence(const std::filesystem::path& path, const ConvergenceTable& table);
ConvergenceTable read_convergence(std::istream& in);

/// File name used for a snapshot of `field` ("rho" or "phi") at time t.
std::string snapshot_name(const std::string& field, double t);

}  // namespace pks
