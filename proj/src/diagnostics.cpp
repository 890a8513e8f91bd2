#include "pks/diagnostics.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace pks {

double discrete_energy(const CellField& rho, const CellField& phi, const EntropyModel& model,
                       const SchemeParams& params) {
  const CellField f = entropy(rho, model);
  const FaceField gphi = grad(phi);
  double f_sum = 0.0;
  for (double v : f.values()) f_sum += v;
  return params.gamma * f_sum * rho.grid().cell_volume() - params.chi * inner(rho, phi) +
         0.5 * params.mu * face_inner(gphi, gphi) + 0.5 * params.alpha * inner(phi, phi);
}

double dissipation_rhs(const SimState& old_state, const SimState& new_state,
                       const FaceField& mobility, const EntropyModel& model,
                       const SchemeParams& params) {
  const double c_stab = params.stabilization_coefficient();
  const CellField d_rho = new_state.rho_curr - old_state.rho_curr;
  const CellField d_phi = new_state.phi_curr - old_state.phi_curr;

  CellField v = s_half(new_state.rho_curr, old_state.rho_curr, model);
  v *= params.gamma;
  v.axpy(-0.5 * params.chi, new_state.phi_curr);
  v.axpy(-0.5 * params.chi, old_state.phi_curr);
  v.axpy(c_stab, d_rho);
  const FaceField gv = grad(v);

  return -params.dt * face_inner(hadamard(mobility, gv), gv) -
         params.theta / params.dt * inner(d_phi, d_phi) - c_stab * inner(d_rho, d_rho);
}

DiagnosticsRecord initial_record(const SimState& state, const EntropyModel& model,
                                 const SchemeParams& params) {
  DiagnosticsRecord rec;
  rec.step = state.step_index;
  rec.time = state.time;
  rec.mass = mean(state.rho_curr) * state.rho_curr.grid().domain_volume();
  rec.energy = discrete_energy(state.rho_curr, state.phi_curr, model, params);
  rec.rho_min = state.rho_curr.min();
  rec.rho_max = state.rho_curr.max();
  return rec;
}

DiagnosticsRecord record(const SimState& old_state, const SimState& new_state,
                         const StepReport& report, const EntropyModel& model,
                         const SchemeParams& params) {
  DiagnosticsRecord rec = initial_record(new_state, model, params);
  const double old_energy = discrete_energy(old_state.rho_curr, old_state.phi_curr, model, params);
  const FaceField mob = mobility_faces(
      extrapolated_mobility_arg(old_state.rho_curr, old_state.rho_prev, params.dt), model,
      params.dt);
  rec.diss_lhs = rec.energy - old_energy;
  rec.diss_rhs = dissipation_rhs(old_state, new_state, mob, model, params);
  rec.newton_iters = report.newton_iterations;
  rec.mean_correction = report.mean_correction_magnitude;
  return rec;
}

namespace {

constexpr const char* kHeader =
    "step,time,mass,energy,rho_min,rho_max,diss_lhs,diss_rhs,newton_iters,mean_correction";

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_diagnostics_header(std::ostream& out) { out << kHeader << '\n'; }

void write_diagnostics_row(std::ostream& out, const DiagnosticsRecord& r) {
  out << r.step << ',' << fmt17(r.time) << ',' << fmt17(r.mass) << ',' << fmt17(r.energy) << ','
      << fmt17(r.rho_min) << ',' << fmt17(r.rho_max) << ',' << fmt17(r.diss_lhs) << ','
      << fmt17(r.diss_rhs) << ',' << r.newton_iters << ',' << fmt17(r.mean_correction) << '\n';
}

std::vector<DiagnosticsRecord> read_diagnostics(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kHeader)
    throw std::runtime_error("diagnostics: unexpected header");
  std::vector<DiagnosticsRecord> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 10)
      throw std::runtime_error("diagnostics: line " + std::to_string(line_no) + " has " +
                               std::to_string(cells.size()) + " columns");
    auto num = [&](int i) { return std::strtod(cells[i].c_str(), nullptr); };
    DiagnosticsRecord r;
    r.step = std::stol(cells[0]);
    r.time = num(1);
    r.mass = num(2);
    r.energy = num(3);
    r.rho_min = num(4);
    r.rho_max = num(5);
    r.diss_lhs = num(6);
    r.diss_rhs = num(7);
    r.newton_iters = std::stoi(cells[8]);
    r.mean_correction = num(9);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace pks
