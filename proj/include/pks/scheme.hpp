#pragma once

#include <array>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

#include "pks/elliptic.hpp"
#include "pks/entropy.hpp"
#include "pks/grid.hpp"
#include "pks/params.hpp"

namespace pks {

/// Solution at t_n plus the previous density needed by the mobility
/// extrapolation.
struct SimState {
  double time = 0.0;
  CellField rho_curr;
  CellField rho_prev;
  CellField phi_curr;
  long step_index = 0;
};

struct StepReport {
  int newton_iterations = 0;
  /// ||dt * R||_2 / max(1, ||rho^n||_2) at the returned density.
  double final_residual = 0.0;
  int damping_events = 0;
  double mean_correction_magnitude = 0.0;
  int linear_iterations = 0;
  int descent_iterations = 0;
  bool used_fallback = false;
};

class SolverFailure : public std::runtime_error {
 public:
  SolverFailure(const std::string& what, StepReport report)
      : std::runtime_error(what), report_(report) {}
  const StepReport& report() const { return report_; }

 private:
  StepReport report_;
};

/// Neither Newton nor the descent fallback reached the tolerance.
class NonConvergence : public SolverFailure {
 public:
  using SolverFailure::SolverFailure;
};

/// No admissible step could be taken; dt is too large for the solver.
class PositivityBreakdown : public SolverFailure {
 public:
  using SolverFailure::SolverFailure;
};

using SourceFunction = std::function<double(const std::array<double, 3>& x, double t)>;

/// Optional right-hand sides of the density and chemoattractant equations,
/// sampled at cell centers and at the step midpoint t_n + dt/2.
struct SourceTerms {
  SourceFunction f1;
  SourceFunction f2;

  bool empty() const { return !f1 && !f2; }
  /// Zero field when the corresponding source is absent.
  CellField sample_f1(const Grid& grid, double t) const;
  CellField sample_f2(const Grid& grid, double t) const;
};

/// rho_hat = sqrt((3/2 rho_n - 1/2 rho_{n-1})^2 + dt^8), pointwise.
CellField extrapolated_mobility_arg(const CellField& rho_curr, const CellField& rho_prev, double dt);

/// Face mobilities: eta(rho_hat) at cells, averaged onto faces. For the
/// saturation model rho_hat is first capped at M - dt^4 so that the
/// extrapolation cannot leave (0, M).
FaceField mobility_faces(const CellField& rho_hat, const EntropyModel& model, double dt);

/// Known part of the eliminated density equation:
///   b = (chi/2) L1^{-1} L2 phi_n + (chi^2/4) L1^{-1} rho_n + (chi/2) phi_n
///       + c_stab rho_n + (chi/2) L1^{-1} f2(t_{n+1/2}).
CellField assemble_known(const SimState& state, const HelmholtzOps& ops, const SourceTerms& sources);

/// The nonlinear equation for rho_{n+1} after phi_{n+1} has been eliminated:
///   R(rho) = (rho - rho_n)/dt - div(D grad(gamma S(rho, rho_n) + G_h rho - b)) - f1
/// with D the face mobility. Its solution is the unique minimizer of the
/// convex step functional J over densities with the prescribed mean.
class DensityProblem {
 public:
  DensityProblem(const SimState& state, const HelmholtzOps& ops, const EntropyModel& model,
                 const SourceTerms& sources = {});
  /// Explicit mobility and known field, for tests.
  DensityProblem(const CellField& rho_old, FaceField mobility, CellField known, CellField f1,
                 const HelmholtzOps& ops, const EntropyModel& model);

  const CellField& rho_old() const { return rho_old_; }
  const FaceField& mobility() const { return mobility_; }
  const CellField& known() const { return known_; }
  const CellField& source() const { return f1_; }
  const HelmholtzOps& ops() const { return *ops_; }
  const EntropyModel& model() const { return model_; }
  const SchemeParams& params() const { return ops_->params(); }
  /// Mean the solution must have: mean(rho_n) + dt mean(f1).
  double target_mean() const { return target_mean_; }

  CellField residual(const CellField& rho) const;
  /// Derivative of the residual at rho applied to `direction`, with the
  /// mobility held fixed.
  CellField apply_jacobian(const CellField& rho, const CellField& direction) const;

  /// Step functional
  ///   J(rho) = ||rho - rho_n - dt f1||^2_{L_D^{-1}} / (2 dt) + gamma <Phi(rho, rho_n), 1>
  ///            + <G_h rho, rho>/2 - <b, rho>,
  /// Phi the antiderivative of S. The L_D^{-1} term is evaluated on the
  /// mean-zero part of its argument.
  double objective(const CellField& rho, const VariableEllipticSolver& solver) const;
  /// Mean-zero gradient of J on the fixed-mean constraint set.
  CellField objective_gradient(const CellField& rho, const VariableEllipticSolver& solver) const;

 private:
  CellField rho_old_;
  FaceField mobility_;
  CellField known_;
  CellField f1_;
  const HelmholtzOps* ops_;
  EntropyModel model_;
  double target_mean_;
};

struct DensitySolution {
  CellField rho;
  StepReport report;
};

/// Damped Newton with a positivity safeguard; falls back to descent on J
/// when Newton stagnates. Starts from `guess` (default rho_n), which must be
/// admissible. Throws NonConvergence or PositivityBreakdown.
DensitySolution solve_density(const DensityProblem& problem,
                              const std::optional<CellField>& guess = std::nullopt);

/// Steepest descent on J in the L_D^{-1} metric with exact line search and
/// the same safeguard. Used as the Newton fallback and as an independent
/// solver in tests.
DensitySolution solve_density_descent(const DensityProblem& problem,
                                      const std::optional<CellField>& guess = std::nullopt,
                                      int max_iters = 5000);

/// phi_{n+1} = L1^{-1}(L2 phi_n + (chi/2)(rho_{n+1} + rho_n) + f2(t_{n+1/2})).
CellField update_phi(const CellField& rho_new, const SimState& state, const HelmholtzOps& ops,
                     const SourceTerms& sources);

struct StepResult {
  SimState state;
  StepReport report;
};

/// One-step driver for a fixed grid, parameter set, entropy model and
/// source terms.
class Stepper {
 public:
  Stepper(const Grid& grid, const SchemeParams& params, const EntropyModel& model,
          SourceTerms sources = {});

  const Grid& grid() const { return ops_.grid(); }
  const SchemeParams& params() const { return ops_.params(); }
  const EntropyModel& model() const { return model_; }
  const HelmholtzOps& ops() const { return ops_; }
  const SourceTerms& sources() const { return sources_; }

  /// Initial state with rho_prev := rho_curr := rho0. Throws DomainError if
  /// rho0 is not strictly admissible.
  SimState bootstrap(const CellField& rho0, const CellField& phi0, double t0 = 0.0) const;

  StepResult step(const SimState& state) const;

 private:
  HelmholtzOps ops_;
  EntropyModel model_;
  SourceTerms sources_;
};

}  // namespace pks
