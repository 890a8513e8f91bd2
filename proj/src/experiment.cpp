#include "pks/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

#include "pks/manufactured.hpp"
#include "pks/snapshot.hpp"

namespace pks {

SimulationError::SimulationError(long step, double time, const std::string& cause,
                                 StepReport report)
    : std::runtime_error("step " + std::to_string(step) + " (t = " + std::to_string(time) +
                         "): " + cause),
      step_(step),
      report_(report) {}

Grid make_grid(const RunConfig& cfg, int n) { return Grid(cfg.dim, n, cfg.origin, cfg.length); }

std::pair<CellField, CellField> initial_fields(const RunConfig& cfg, const Grid& grid) {
  if (cfg.ic == InitialCondition::Manufactured) {
    const ManufacturedSolution exact(cfg.dim, cfg.scheme);
    return {exact.sample_rho(grid, 0.0), exact.sample_phi(grid, 0.0)};
  }
  CellField rho(grid), phi(grid);
  const GaussianIc& g = cfg.gaussian;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    const auto x = grid.position(i);
    double r2 = 0.0;
    for (int d = 0; d < cfg.dim; ++d) r2 += (x[d] - g.center[d]) * (x[d] - g.center[d]);
    const double bump = std::exp(-g.width * r2);
    rho[i] = g.amplitude_rho * bump;
    phi[i] = g.amplitude_phi * bump;
  }
  return {std::move(rho), std::move(phi)};
}

SourceTerms make_sources(const RunConfig& cfg, const SchemeParams& params) {
  if (!cfg.sources || cfg.ic != InitialCondition::Manufactured) return {};
  return ManufacturedSolution(cfg.dim, params).sources();
}

RunSummary simulate(const RunConfig& cfg, int n, double dt, const RunObserver& observer) {
  const Grid grid = make_grid(cfg, n);
  SchemeParams params = cfg.scheme;
  params.dt = dt;

  const double steps_exact = cfg.final_time / dt;
  long full_steps = static_cast<long>(std::floor(steps_exact + 1e-9));
  double remainder = cfg.final_time - static_cast<double>(full_steps) * dt;
  if (remainder <= 1e-9 * dt) remainder = 0.0;

  const Stepper stepper(grid, params, cfg.entropy, make_sources(cfg, params));
  auto [rho0, phi0] = initial_fields(cfg, grid);

  SimState state = stepper.bootstrap(rho0, phi0, 0.0);
  const DiagnosticsRecord initial = initial_record(state, cfg.entropy, params);
  DiagnosticsRecord final_record = initial;
  if (observer.on_state) observer.on_state(state);
  if (observer.on_record) observer.on_record(initial);

  auto advance = [&](const Stepper& s, const SchemeParams& p, double t_next) {
    std::optional<StepResult> result;
    try {
      result.emplace(s.step(state));
    } catch (const SolverFailure& e) {
      throw SimulationError(state.step_index + 1, state.time, e.what(), e.report());
    } catch (const DomainError& e) {
      throw SimulationError(state.step_index + 1, state.time, e.what(), {});
    } catch (const EllipticSolveError& e) {
      throw SimulationError(state.step_index + 1, state.time, e.what(), {});
    }
    result->state.time = t_next;
    final_record = record(state, result->state, result->report, cfg.entropy, p);
    state = std::move(result->state);
    if (observer.on_state) observer.on_state(state);
    if (observer.on_record) observer.on_record(final_record);
  };

  for (long k = 1; k <= full_steps; ++k)
    advance(stepper, params, static_cast<double>(k) * dt);
  double last_dt = dt;
  bool shortened = false;

  if (remainder > 0.0) {
    SchemeParams last = params;
    last.dt = remainder;
    const Stepper tail(grid, last, cfg.entropy, make_sources(cfg, last));
    advance(tail, last, cfg.final_time);
    last_dt = remainder;
    shortened = true;
  }

  const long steps = state.step_index;
  return RunSummary{std::move(state), steps, last_dt, shortened, initial, final_record};
}

std::string snapshot_name(const std::string& field, double t) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_T%g.snap", field.c_str(), t);
  return buf;
}

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

}  // namespace

RunSummary run(const RunConfig& cfg, std::ostream& log) {
  std::filesystem::create_directories(cfg.output_dir);
  std::ofstream diag = open_output(cfg.output_dir / "diagnostics.csv");
  write_diagnostics_header(diag);

  std::vector<bool> written(cfg.snapshot_times.size(), false);
  const double dt = cfg.scheme.dt;
  const long every = cfg.diagnostics_every;

  RunObserver observer;
  observer.on_state = [&](const SimState& s) {
    for (std::size_t i = 0; i < cfg.snapshot_times.size(); ++i) {
      const double ts = cfg.snapshot_times[i];
      if (written[i] || std::abs(s.time - ts) > 0.5 * dt * (1 + 1e-9)) continue;
      write_snapshot(cfg.output_dir / snapshot_name("rho", ts), s.rho_curr, s.time);
      write_snapshot(cfg.output_dir / snapshot_name("phi", ts), s.phi_curr, s.time);
      written[i] = true;
    }
  };
  observer.on_record = [&](const DiagnosticsRecord& r) {
    const bool last = std::abs(r.time - cfg.final_time) <= 1e-12 * std::max(1.0, cfg.final_time);
    if (r.step % every == 0 || last) write_diagnostics_row(diag, r);
  };

  const RunSummary summary = simulate(cfg, cfg.n, dt, observer);
  if (!diag) throw std::runtime_error("error writing diagnostics.csv");
  log << "steps: " << summary.steps << "  final time: " << summary.final_state.time << '\n';
  if (summary.shortened_last_step)
    log << "note: T is not a multiple of dt; last step shortened to " << summary.last_dt << '\n';
  log << "mass: " << summary.initial.mass << " -> " << summary.final.mass << '\n';
  log << "rho range at T: [" << summary.final.rho_min << ", " << summary.final.rho_max << "]\n";
  return summary;
}

void compute_orders(ConvergenceTable& table) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (i == 0) {
      table[i].order_rho = table[i].order_phi = nan;
      continue;
    }
    const double r = std::log(table[i - 1].h / table[i].h);
    table[i].order_rho = std::log(table[i - 1].err_rho_linf / table[i].err_rho_linf) / r;
    table[i].order_phi = std::log(table[i - 1].err_phi_linf / table[i].err_phi_linf) / r;
  }
}

ConvergenceTable sweep(const RunConfig& cfg, std::ostream& log) {
  if (cfg.sweep_n.empty()) throw ConfigError("sweep requires a non-empty sweep.N list");
  const ManufacturedSolution exact(cfg.dim, cfg.scheme);
  ConvergenceTable table;
  for (int n : cfg.sweep_n) {
    const double h = cfg.length / n;
    const double dt = cfg.sweep_dt_over_h * h;
    const RunSummary s = simulate(cfg, n, dt);
    const ManufacturedErrors err = manufactured_errors(s.final_state, exact, s.final_state.time);
    table.push_back({h, dt, err.rho_linf, err.phi_linf, 0.0, 0.0});
    log << "N = " << n << "  steps = " << s.steps << "  err_rho = " << err.rho_linf
        << "  err_phi = " << err.phi_linf;
    if (s.shortened_last_step) log << "  (last step shortened to " << s.last_dt << ")";
    log << '\n';
  }
  compute_orders(table);
  std::filesystem::create_directories(cfg.output_dir);
  write_convergence(cfg.output_dir / "convergence.csv", table);
  return table;
}

namespace {

constexpr const char* kConvergenceHeader = "h,dt,err_rho_linf,err_phi_linf,order_rho,order_phi";

std::string fmt17(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_convergence(std::ostream& out, const ConvergenceTable& table) {
  out << kConvergenceHeader << '\n';
  for (const auto& r : table)
    out << fmt17(r.h) << ',' << fmt17(r.dt) << ',' << fmt17(r.err_rho_linf) << ','
        << fmt17(r.err_phi_linf) << ',' << fmt17(r.order_rho) << ',' << fmt17(r.order_phi)
        << '\n';
}

void write_convergence(const std::filesystem::path& path, const ConvergenceTable& table) {
  std::ofstream out = open_output(path);
  write_convergence(out, table);
  if (!out) throw std::runtime_error("error writing " + path.string());
}

ConvergenceTable read_convergence(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kConvergenceHeader)
    throw std::runtime_error("convergence: unexpected header");
  ConvergenceTable table;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> v;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) v.push_back(std::strtod(cell.c_str(), nullptr));
    if (v.size() != 6)
      throw std::runtime_error("convergence: line " + std::to_string(line_no) +
                               " does not have 6 columns");
    table.push_back({v[0], v[1], v[2], v[3], v[4], v[5]});
  }
  return table;
}

}  // namespace pks
