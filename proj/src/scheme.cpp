#include "pks/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pks/krylov.hpp"

namespace pks {

namespace {

CellField sample(const SourceFunction& fn, const Grid& grid, double t) {
  CellField out(grid);
  if (!fn) return out;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fn(grid.position(i), t);
  return out;
}

// Largest step fraction along `delta` that keeps every cell at least a
// (1 - sigma) share of its distance to the ends of the admissible interval.
double safeguard_step(const CellField& rho, const CellField& delta, const EntropyModel& model,
                      double sigma) {
  const double upper = model.upper_bound();
  double tau = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < rho.size(); ++i) {
    if (delta[i] < 0.0) {
      tau = std::min(tau, sigma * rho[i] / -delta[i]);
    } else if (delta[i] > 0.0 && std::isfinite(upper)) {
      tau = std::min(tau, sigma * (upper - rho[i]) / delta[i]);
    }
  }
  return tau;
}

// Constant-coefficient model of the Newton Jacobian, diagonal in the cosine
// basis:  1/dt + |lambda| (gamma c_eff + D_mean g_k),  where c_eff is the
// face average of D * dS/drho and g_k the G_h symbol.
class JacobianPreconditioner {
 public:
  JacobianPreconditioner(const DensityProblem& problem, const CellField& rho) : problem_(&problem) {
    const HelmholtzOps& ops = problem.ops();
    const SchemeParams& p = ops.params();
    const CellField ds = s_half_derivative(rho, problem.rho_old(), problem.model());
    const FaceField ds_faces = face_average(ds);
    const FaceField& d = problem.mobility();
    const Grid& grid = rho.grid();
    const std::size_t n = grid.n();
    double d_sum = 0.0, prod_sum = 0.0;
    std::size_t count = 0;
    for (int axis = 0; axis < grid.dim(); ++axis) {
      auto dc = d.component(axis);
      auto sc = ds_faces.component(axis);
      const std::size_t stride = grid.stride(axis);
      for (std::size_t idx = 0; idx < dc.size(); ++idx) {
        const std::size_t m = (idx / stride) % (n + 1);
        if (m == 0 || m == n) continue;
        d_sum += dc[idx];
        prod_sum += dc[idx] * sc[idx];
        ++count;
      }
    }
    const double d_mean = count ? d_sum / count : 0.0;
    const double c_eff = count ? prod_sum / count : 0.0;
    const auto lam = ops.transform().laplacian_symbol();
    const auto gh = ops.gh_symbol();
    inverse_symbol_.resize(lam.size());
    for (std::size_t k = 0; k < lam.size(); ++k) {
      const double sym = 1.0 / p.dt + (-lam[k]) * (p.gamma * c_eff + d_mean * gh[k]);
      inverse_symbol_[k] = 1.0 / sym;
    }
  }

  CellField operator()(const CellField& r) const {
    return problem_->ops().transform().apply_multiplier(r, inverse_symbol_);
  }

 private:
  const DensityProblem* problem_;
  std::vector<double> inverse_symbol_;
};

}  // namespace

CellField SourceTerms::sample_f1(const Grid& grid, double t) const { return sample(f1, grid, t); }
CellField SourceTerms::sample_f2(const Grid& grid, double t) const { return sample(f2, grid, t); }

CellField extrapolated_mobility_arg(const CellField& rho_curr, const CellField& rho_prev, double dt) {
  if (!(rho_curr.grid() == rho_prev.grid()))
    throw std::invalid_argument("extrapolated_mobility_arg: grid mismatch");
  const double reg = std::pow(dt, 8);
  CellField out(rho_curr.grid());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double e = 1.5 * rho_curr[i] - 0.5 * rho_prev[i];
    out[i] = std::sqrt(e * e + reg);
  }
  return out;
}

FaceField mobility_faces(const CellField& rho_hat, const EntropyModel& model, double dt) {
  CellField eta(rho_hat.grid());
  const double cap = model.upper_bound() - std::pow(dt, 4);
  for (std::size_t i = 0; i < eta.size(); ++i) {
    const double r = std::min(rho_hat[i], cap);
    try {
      eta[i] = model.mobility(r);
    } catch (const DomainError& e) {
      throw DomainError("mobility argument", e.value(), i);
    }
  }
  return face_average(eta);
}

CellField assemble_known(const SimState& state, const HelmholtzOps& ops, const SourceTerms& sources) {
  const SchemeParams& p = ops.params();
  const double chi = p.chi;
  CellField rhs = ops.apply_L2(state.phi_curr);
  rhs *= 0.5 * chi;
  rhs.axpy(0.25 * chi * chi, state.rho_curr);
  if (sources.f2) rhs.axpy(0.5 * chi, sources.sample_f2(ops.grid(), state.time + 0.5 * p.dt));
  CellField b = ops.solve_L1(rhs);
  b.axpy(0.5 * chi, state.phi_curr);
  b.axpy(p.stabilization_coefficient(), state.rho_curr);
  return b;
}

// ---------------------------------------------------------------------------

DensityProblem::DensityProblem(const SimState& state, const HelmholtzOps& ops,
                               const EntropyModel& model, const SourceTerms& sources)
    : DensityProblem(state.rho_curr,
                     mobility_faces(extrapolated_mobility_arg(state.rho_curr, state.rho_prev,
                                                              ops.params().dt),
                                    model, ops.params().dt),
                     assemble_known(state, ops, sources),
                     sources.sample_f1(ops.grid(), state.time + 0.5 * ops.params().dt), ops,
                     model) {}

DensityProblem::DensityProblem(const CellField& rho_old, FaceField mobility, CellField known,
                               CellField f1, const HelmholtzOps& ops, const EntropyModel& model)
    : rho_old_(rho_old),
      mobility_(std::move(mobility)),
      known_(std::move(known)),
      f1_(std::move(f1)),
      ops_(&ops),
      model_(model),
      target_mean_(mean(rho_old) + ops.params().dt * mean(f1_)) {
  require_admissible(rho_old_, model_);
}

CellField DensityProblem::residual(const CellField& rho) const {
  const SchemeParams& p = params();
  CellField potential = s_half(rho, rho_old_, model_);
  potential *= p.gamma;
  potential += ops_->apply_Gh(rho);
  potential -= known_;
  CellField r = rho - rho_old_;
  r *= 1.0 / p.dt;
  r -= div_coeff(mobility_, grad(potential));
  r -= f1_;
  return r;
}

CellField DensityProblem::apply_jacobian(const CellField& rho, const CellField& direction) const {
  const SchemeParams& p = params();
  CellField lin = hadamard(s_half_derivative(rho, rho_old_, model_), direction);
  lin *= p.gamma;
  lin += ops_->apply_Gh(direction);
  CellField out = (1.0 / p.dt) * direction;
  out -= div_coeff(mobility_, grad(lin));
  return out;
}

double DensityProblem::objective(const CellField& rho, const VariableEllipticSolver& solver) const {
  const SchemeParams& p = params();
  CellField diff = rho - rho_old_;
  diff.axpy(-p.dt, f1_);
  remove_mean(diff);
  const double transport = norm_weighted_hm1(solver, mobility_, diff);
  double entropy_part = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    try {
      entropy_part += s_half_potential(rho[i], rho_old_[i], model_);
    } catch (const DomainError& e) {
      throw DomainError("step functional", e.value(), i);
    }
  }
  entropy_part *= rho.grid().cell_volume();
  return transport * transport / (2.0 * p.dt) + p.gamma * entropy_part +
         0.5 * inner(ops_->apply_Gh(rho), rho) - inner(known_, rho);
}

CellField DensityProblem::objective_gradient(const CellField& rho,
                                             const VariableEllipticSolver& solver) const {
  const SchemeParams& p = params();
  CellField diff = rho - rho_old_;
  diff.axpy(-p.dt, f1_);
  remove_mean(diff);
  CellField g = solver.solve(mobility_, diff).u;
  g *= 1.0 / p.dt;
  g.axpy(p.gamma, s_half(rho, rho_old_, model_));
  g += ops_->apply_Gh(rho);
  g -= known_;
  remove_mean(g);
  return g;
}

// ---------------------------------------------------------------------------

namespace {

double residual_scale(const DensityProblem& problem) {
  return std::max(1.0, norm_l2(problem.rho_old()));
}

// Shifts the mean of `field` by `shift`, spreading it with weights that
// vanish at the ends of the admissible interval around `rho`. A
// roundoff-sized shift then cannot push cells near zero (or near M) across.
void add_mean(CellField& field, double shift, const CellField& rho, const EntropyModel& model) {
  const double upper = model.upper_bound();
  CellField weight(rho.grid());
  for (std::size_t i = 0; i < rho.size(); ++i)
    weight[i] = std::isfinite(upper) ? rho[i] * (upper - rho[i]) / upper : rho[i];
  const double w_mean = mean(weight);
  if (w_mean > 0.0) field.axpy(shift / w_mean, weight);
}

// Restores the prescribed mean and fills the closing report fields.
void finalize(const DensityProblem& problem, CellField& rho, StepReport& report) {
  const double shift = problem.target_mean() - mean(rho);
  add_mean(rho, shift, CellField(rho), problem.model());
  report.mean_correction_magnitude = std::abs(shift);
  for (std::size_t i = 0; i < rho.size(); ++i)
    if (!problem.model().admissible(rho[i]))
      throw PositivityBreakdown("mean correction pushed cell " + std::to_string(i) +
                                    " out of the admissible interval",
                                report);
  report.final_residual =
      problem.params().dt * norm_l2(problem.residual(rho)) / residual_scale(problem);
}

struct DescentOutcome {
  CellField rho;
  bool converged;
};

DescentOutcome run_descent(const DensityProblem& problem, CellField rho, StepReport& report,
                           int max_iters) {
  const SchemeParams& p = problem.params();
  const double target = p.newton_tol * residual_scale(problem);
  const VariableEllipticSolver solver(problem.ops().shared_transform(),
                                      EllipticOptions{std::min(1e-12, p.elliptic.tol),
                                                      std::max(1000, p.elliptic.max_iters)});
  double tau_guess = 1.0;
  for (int it = 0; it < max_iters; ++it) {
    const CellField r = problem.residual(rho);
    if (p.dt * norm_l2(r) <= target) return {std::move(rho), true};
    ++report.descent_iterations;

    // Steepest descent for J in the L_D^{-1} metric is -dt R; along it the
    // slope of J is -dt <R(rho + tau d), L_D^{-1} R(rho)>.
    const CellField d = -p.dt * r;
    CellField r0 = r;
    remove_mean(r0);
    const CellField u = solver.solve(problem.mobility(), r0).u;
    auto slope = [&](double tau) {
      CellField trial = rho;
      trial.axpy(tau, d);
      return -p.dt * inner(problem.residual(trial), u);
    };
    const double slope0 = -p.dt * inner(r, u);
    if (!(slope0 < 0.0)) break;

    const double tau_max = safeguard_step(rho, d, problem.model(), p.safeguard_sigma);
    if (tau_max < 1e-14)
      throw PositivityBreakdown("descent: no admissible step (safeguard fraction " +
                                    std::to_string(tau_max) + ")",
                                report);

    double lo = 0.0, f_lo = slope0;
    double hi = std::min(tau_guess, tau_max);
    double f_hi = slope(hi);
    while (f_hi < 0.0 && hi < tau_max) {
      lo = hi;
      f_lo = f_hi;
      hi = std::min(2.0 * hi, tau_max);
      f_hi = slope(hi);
    }
    double tau = hi;
    if (f_hi > 0.0) {
      // Illinois regula falsi on the monotone slope.
      int side = 0;
      for (int k = 0; k < 60; ++k) {
        tau = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
        const double f = slope(tau);
        if (std::abs(f) <= 0.1 * std::abs(slope0)) break;
        if (f < 0.0) {
          lo = tau;
          f_lo = f;
          if (side == -1) f_hi *= 0.5;
          side = -1;
        } else {
          hi = tau;
          f_hi = f;
          if (side == 1) f_lo *= 0.5;
          side = 1;
        }
      }
    }
    if (tau < 1.0) ++report.damping_events;
    rho.axpy(tau, d);
    tau_guess = std::max(1e-3, 2.0 * tau);
  }
  const bool converged = p.dt * norm_l2(problem.residual(rho)) <= target;
  return {std::move(rho), converged};
}

}  // namespace

DensitySolution solve_density(const DensityProblem& problem, const std::optional<CellField>& guess) {
  const SchemeParams& p = problem.params();
  const double dt = p.dt;
  const double target = p.newton_tol * residual_scale(problem);
  CellField rho = guess ? *guess : problem.rho_old();
  require_admissible(rho, problem.model());

  StepReport report;
  CellField r = problem.residual(rho);
  double res = dt * norm_l2(r);
  bool stagnated = false;

  while (res > target) {
    if (report.newton_iterations >= p.newton_max_iters) {
      stagnated = true;
      break;
    }
    ++report.newton_iterations;

    const JacobianPreconditioner precond(problem, rho);
    const LinearMap jac = [&](const CellField& v) { return problem.apply_jacobian(rho, v); };
    const LinearMap pre = [&](const CellField& v) { return precond(v); };
    CellField delta(rho.grid());
    const double eta = std::clamp(0.1 * target / res, 1e-10, 1e-3);
    const KrylovResult lin = gmres(jac, pre, -1.0 * r, delta, eta, 400);
    report.linear_iterations += lin.iterations;
    // The mean of J delta is mean(delta)/dt, so the exact Newton step has
    // mean -dt mean(R).
    add_mean(delta, -dt * mean(r) - mean(delta), rho, problem.model());

    const double tau_max = safeguard_step(rho, delta, problem.model(), p.safeguard_sigma);
    double tau = std::min(1.0, tau_max);
    if (tau < 1.0) ++report.damping_events;
    bool accepted = false;
    while (tau > 1e-10) {
      CellField trial = rho;
      trial.axpy(tau, delta);
      try {
        CellField r_trial = problem.residual(trial);
        const double res_trial = dt * norm_l2(r_trial);
        if (res_trial <= (1.0 - 1e-4 * tau) * res) {
          rho = std::move(trial);
          r = std::move(r_trial);
          res = res_trial;
          accepted = true;
          break;
        }
      } catch (const DomainError&) {
      }
      tau *= 0.5;
      ++report.damping_events;
    }
    if (!accepted) {
      stagnated = true;
      break;
    }
  }

  if (stagnated) {
    report.used_fallback = true;
    auto outcome = run_descent(problem, std::move(rho), report, 5000);
    rho = std::move(outcome.rho);
    if (!outcome.converged) {
      report.final_residual = dt * norm_l2(problem.residual(rho)) / residual_scale(problem);
      throw NonConvergence("density solve did not converge (residual " +
                               std::to_string(report.final_residual) + ")",
                           report);
    }
  }
  finalize(problem, rho, report);
  return {std::move(rho), report};
}

DensitySolution solve_density_descent(const DensityProblem& problem,
                                      const std::optional<CellField>& guess, int max_iters) {
  CellField rho = guess ? *guess : problem.rho_old();
  require_admissible(rho, problem.model());
  StepReport report;
  report.used_fallback = true;
  auto outcome = run_descent(problem, std::move(rho), report, max_iters);
  if (!outcome.converged) {
    report.final_residual = problem.params().dt * norm_l2(problem.residual(outcome.rho)) /
                            residual_scale(problem);
    throw NonConvergence("descent did not converge (residual " +
                             std::to_string(report.final_residual) + ")",
                         report);
  }
  finalize(problem, outcome.rho, report);
  return {std::move(outcome.rho), report};
}

CellField update_phi(const CellField& rho_new, const SimState& state, const HelmholtzOps& ops,
                     const SourceTerms& sources) {
  const SchemeParams& p = ops.params();
  CellField rhs = ops.apply_L2(state.phi_curr);
  rhs.axpy(0.5 * p.chi, rho_new);
  rhs.axpy(0.5 * p.chi, state.rho_curr);
  if (sources.f2) rhs += sources.sample_f2(ops.grid(), state.time + 0.5 * p.dt);
  return ops.solve_L1(rhs);
}

// ---------------------------------------------------------------------------

Stepper::Stepper(const Grid& grid, const SchemeParams& params, const EntropyModel& model,
                 SourceTerms sources)
    : ops_((params.validate(), grid), params), model_(model), sources_(std::move(sources)) {}

SimState Stepper::bootstrap(const CellField& rho0, const CellField& phi0, double t0) const {
  if (!(rho0.grid() == grid()) || !(phi0.grid() == grid()))
    throw std::invalid_argument("bootstrap: initial data on the wrong grid");
  if (!phi0.all_finite()) throw std::invalid_argument("bootstrap: initial phi is not finite");
  require_admissible(rho0, model_);
  return SimState{t0, rho0, rho0, phi0, 0};
}

StepResult Stepper::step(const SimState& state) const {
  const DensityProblem problem(state, ops_, model_, sources_);
  DensitySolution sol = solve_density(problem);
  CellField phi = update_phi(sol.rho, state, ops_, sources_);
  StepResult out{SimState{state.time + params().dt, std::move(sol.rho), state.rho_curr,
                          std::move(phi), state.step_index + 1},
                 sol.report};
  return out;
}

}  // namespace pks
