#pragma once

#include <iosfwd>
#include <vector>

#include "pks/entropy.hpp"
#include "pks/grid.hpp"
#include "pks/params.hpp"
#include "pks/scheme.hpp"

namespace pks {

struct DiagnosticsRecord {
  long step = 0;
  double time = 0.0;
  double mass = 0.0;  // <rho, 1>
  double energy = 0.0;
  double rho_min = 0.0;
  double rho_max = 0.0;
  double diss_lhs = 0.0;  // F_h^{n+1} - F_h^n
  double diss_rhs = 0.0;  // right side of the dissipation inequality, <= 0
  int newton_iters = 0;
  double mean_correction = 0.0;
};

/// F_h = gamma <f(rho), 1> - chi <rho, phi> + (mu/2) ||grad phi||^2 + (alpha/2) ||phi||^2.
double discrete_energy(const CellField& rho, const CellField& phi, const EntropyModel& model,
                       const SchemeParams& params);

/// -dt [D grad v, grad v] - (theta/dt) ||phi_new - phi_old||^2 - c_stab ||rho_new - rho_old||^2
/// with v = gamma S(rho_new, rho_old) - (chi/2)(phi_new + phi_old) + c_stab (rho_new - rho_old).
double dissipation_rhs(const SimState& old_state, const SimState& new_state,
                       const FaceField& mobility, const EntropyModel& model,
                       const SchemeParams& params);

/// Record of the initial state (step 0, zero dissipation columns).
DiagnosticsRecord initial_record(const SimState& state, const EntropyModel& model,
                                 const SchemeParams& params);

/// Record of the step old_state -> new_state; `params.dt` must be the step
/// size actually used.
DiagnosticsRecord record(const SimState& old_state, const SimState& new_state,
                         const StepReport& report, const EntropyModel& model,
                         const SchemeParams& params);

/// Header `step,time,mass,energy,rho_min,rho_max,diss_lhs,diss_rhs,newton_iters,mean_correction`.
void write_diagnostics_header(std::ostream& out);
/// One CSV row, reals with 17 significant digits.
void write_diagnostics_row(std::ostream& out, const DiagnosticsRecord& rec);
std::vector<DiagnosticsRecord> read_diagnostics(std::istream& in);

}  // namespace pks
