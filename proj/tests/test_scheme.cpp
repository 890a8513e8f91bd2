#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "oracle.hpp"
#include "pks/diagnostics.hpp"
#include "pks/manufactured.hpp"
#include "pks/scheme.hpp"

using namespace pks;
using namespace pks::testing;

namespace {

SchemeParams params(double dt = 1e-3) {
  SchemeParams p;
  p.gamma = 1.0;
  p.chi = 1.5;
  p.theta = 0.8;
  p.mu = 1.0;
  p.alpha = 0.7;
  p.dt = dt;
  return p;
}

// Smooth positive random data: a few random cosine modes around `base`.
CellField smooth_positive(const Grid& g, double base, double amp) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  CellField f(g, base);
  for (int mode = 0; mode < 4; ++mode) {
    const int kx = mode % 3, ky = (mode + 1) % 3;
    const double c = amp * u(rng()) / 4.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      const auto x = g.position(i);
      f[i] += c * std::cos(kx * M_PI * x[0]) * std::cos(ky * M_PI * x[1]);
    }
  }
  return f;
}

SimState random_state(const Grid& g, double base = 1.0, double spread = 0.5) {
  CellField rho = random_field(g, base - spread, base + spread);
  CellField prev = random_field(g, base - spread, base + spread);
  CellField phi = random_field(g, -1.0, 1.0);
  return SimState{0.0, rho, prev, phi, 3};
}

std::vector<EntropyModel> models() {
  return {EntropyModel::classical(), EntropyModel::bounded_mobility(0.5),
          EntropyModel::saturation(3.0)};
}

Eigen::MatrixXd dense_L1(const Grid& g, const SchemeParams& p) {
  const auto n = static_cast<Eigen::Index>(g.cell_count());
  return (p.theta / p.dt + p.alpha / 2) * Eigen::MatrixXd::Identity(n, n) -
         (p.mu / 2) * dense_laplacian(g);
}

}  // namespace

TEST(Mobility, ExtrapolatedArgument) {
  const Grid g(2, 4);
  const double dt = 1e-2;
  const CellField c(g, 2.0);
  const CellField a = extrapolated_mobility_arg(c, c, dt);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_DOUBLE_EQ(a[i], std::sqrt(4.0 + 1e-16));
  const CellField z = extrapolated_mobility_arg(CellField(g, 1.0), CellField(g, 3.0), dt);
  for (std::size_t i = 0; i < z.size(); ++i) EXPECT_DOUBLE_EQ(z[i], 1e-8);
  const CellField r = extrapolated_mobility_arg(random_field(g, -5, 5), random_field(g, -5, 5), dt);
  EXPECT_GE(r.min(), 1e-8);
}

TEST(Mobility, FacesArePositiveAndCapped) {
  const Grid g(2, 6);
  const auto sat = EntropyModel::saturation(2.0);
  CellField hat = random_field(g, 0.1, 1.9);
  hat[4] = 2.5;  // extrapolation overshoot beyond M
  const FaceField D = mobility_faces(hat, sat, 1e-2);
  EXPECT_GT(D.min(), 0.0);
  const FaceField Dc = mobility_faces(CellField(g, 1.0), EntropyModel::classical(), 1e-2);
  for (int d = 0; d < 2; ++d)
    for (double v : Dc.component(d)) EXPECT_DOUBLE_EQ(v, 1.0);
}

TEST(Known, ZeroChemotaxis) {
  const Grid g(2, 6);
  SchemeParams p = params();
  p.chi = 0.0;
  const HelmholtzOps ops(g, p);
  EXPECT_EQ(norm_linf(assemble_known(random_state(g), ops, {})), 0.0);
}

TEST(Known, ConstantStateMatchesSymbolArithmetic) {
  const Grid g(2, 6);
  const SchemeParams p = params();
  const HelmholtzOps ops(g, p);
  const double c = 1.3, phi = p.chi * c / p.alpha;
  const SimState s{0.0, CellField(g, c), CellField(g, c), CellField(g, phi), 1};
  const double l1 = p.theta / p.dt + p.alpha / 2, l2 = p.theta / p.dt - p.alpha / 2;
  const double c_stab = p.chi * p.chi * p.dt / (4 * p.theta);
  const double expected = p.chi / 2 * l2 / l1 * phi + p.chi * p.chi / 4 / l1 * c +
                          p.chi / 2 * phi + c_stab * c;
  const CellField b = assemble_known(s, ops, {});
  for (std::size_t i = 0; i < b.size(); ++i) EXPECT_NEAR(b[i], expected, 1e-12 * expected);
}

TEST(Known, MatchesDenseTermByTerm) {
  for (auto stab : {Stabilization::Standard, Stabilization::Damped}) {
    const Grid g(2, 6);
    SchemeParams p = params();
    p.stabilization = stab;
    const HelmholtzOps ops(g, p);
    const SimState s = random_state(g);
    const Eigen::MatrixXd L1 = dense_L1(g, p);
    const auto n = static_cast<Eigen::Index>(g.cell_count());
    const Eigen::MatrixXd L2 = (2 * p.theta / p.dt) * Eigen::MatrixXd::Identity(n, n) - L1;
    const double c_stab = stab == Stabilization::Standard
                              ? p.chi * p.chi * p.dt / (4 * p.theta)
                              : p.chi * p.chi * p.dt / (4 * p.theta + 2 * p.alpha * p.dt);
    const Eigen::VectorXd phi = to_vec(s.phi_curr), rho = to_vec(s.rho_curr);
    const auto lu = L1.lu();
    const Eigen::VectorXd b = p.chi / 2 * lu.solve(L2 * phi) + p.chi * p.chi / 4 * lu.solve(rho) +
                              p.chi / 2 * phi + c_stab * rho;
    EXPECT_LE(rel_diff(assemble_known(s, ops, {}), from_vec(g, b)), 1e-11);
  }
}

TEST(Residual, ConstantSteadyStateIsFixedPoint) {
  const Grid g(2, 8);
  const SchemeParams p = params();
  const HelmholtzOps ops(g, p);
  const double c = 0.9;
  const SimState s{0.0, CellField(g, c), CellField(g, c), CellField(g, p.chi * c / p.alpha), 1};
  const DensityProblem prob(s, ops, EntropyModel::classical());
  EXPECT_LE(norm_linf(prob.residual(s.rho_curr)), 1e-9);

  const DensitySolution sol = solve_density(prob);
  EXPECT_LE(sol.report.newton_iterations, 1);
  EXPECT_LE(norm_linf(sol.rho - s.rho_curr), p.newton_tol);
  const CellField phi = update_phi(sol.rho, s, ops, {});
  EXPECT_LE(norm_linf(phi - s.phi_curr), 1e-12);
}

TEST(Residual, MeanTelescopes) {
  const Grid g(2, 8);
  const SchemeParams p = params();
  const HelmholtzOps ops(g, p);
  for (const auto& m : models()) {
    const SimState s = random_state(g);
    const DensityProblem prob(s, ops, m);
    const CellField trial = random_field(g, 0.6, 1.4);
    const double expected = mean(trial - s.rho_curr) / p.dt;
    EXPECT_NEAR(mean(prob.residual(trial)), expected, 1e-10 * norm_linf(prob.residual(trial)));
  }
}

TEST(Residual, JacobianMatchesFiniteDifferences) {
  const Grid g(2, 8);
  const SchemeParams p = params(1e-2);
  const HelmholtzOps ops(g, p);
  for (const auto& m : models()) {
    const SimState s = random_state(g);
    const DensityProblem prob(s, ops, m);
    const CellField rho = random_field(g, 0.7, 1.3);
    const CellField dir = random_field(g);
    const CellField jd = prob.apply_jacobian(rho, dir);
    const CellField r0 = prob.residual(rho);
    std::vector<double> defects;
    for (double eps : {1e-4, 1e-5, 1e-6}) {
      CellField shifted = rho;
      shifted.axpy(eps, dir);
      CellField fd = prob.residual(shifted) - r0;
      fd *= 1.0 / eps;
      defects.push_back(norm_l2(fd - jd) / norm_l2(jd));
    }
    EXPECT_LT(defects[0], 1e-3) << m.describe();
    for (std::size_t i = 1; i < defects.size(); ++i) {
      const double ratio = defects[i - 1] / defects[i];
      EXPECT_GT(ratio, 5.0) << m.describe();
      EXPECT_LT(ratio, 20.0) << m.describe();
    }
  }
}

TEST(Solve, NewtonMatchesDescentAndIsOptimal) {
  const Grid g(2, 8);
  const SchemeParams p = params();
  const HelmholtzOps ops(g, p);
  const VariableEllipticSolver solver(g, EllipticOptions{1e-13, 1000});
  for (const auto& m : models()) {
    for (int rep = 0; rep < 3; ++rep) {
      const SimState s = random_state(g);
      const DensityProblem prob(s, ops, m);
      const DensitySolution newton = solve_density(prob);
      const DensitySolution descent = solve_density_descent(prob);
      EXPECT_LE(norm_l2(newton.rho - descent.rho), 10 * p.newton_tol) << m.describe();
      EXPECT_LE(newton.report.final_residual, p.newton_tol);
      EXPECT_LE(newton.report.mean_correction_magnitude, 10 * p.newton_tol);
      EXPECT_NEAR(mean(newton.rho), prob.target_mean(), 1e-14 * prob.target_mean());

      // First-order optimality of the step functional, with its gradient
      // assembled here from dense operators:
      //   grad J = L_D^{-1}(rho - rho_n)/dt + gamma S(rho, rho_n) + G_h rho - b
      // restricted to mean-zero directions.
      const Eigen::MatrixXd LD = dense_elliptic(g, [&](std::size_t a, std::size_t b, int axis) {
        return face_value(prob.mobility(), a, b, axis);
      });
      const auto n = static_cast<Eigen::Index>(g.cell_count());
      const Eigen::MatrixXd LDreg = LD + Eigen::MatrixXd::Ones(n, n) / static_cast<double>(n);
      const Eigen::MatrixXd L1 = dense_L1(g, p);
      const double c_stab = p.stabilization_coefficient();
      CellField diff = newton.rho - s.rho_curr;
      remove_mean(diff);
      const Eigen::VectorXd rho = to_vec(newton.rho);
      Eigen::VectorXd grad_j = LDreg.lu().solve(to_vec(diff)) / p.dt +
                               p.gamma * to_vec(s_half(newton.rho, s.rho_curr, m)) +
                               c_stab * rho - p.chi * p.chi / 4 * L1.lu().solve(rho) -
                               to_vec(prob.known());
      grad_j.array() -= grad_j.mean();
      const double optimality = std::sqrt(g.cell_volume()) * grad_j.norm();
      EXPECT_LE(optimality, 10 * p.newton_tol) << m.describe();

      // Directional derivative of J along random mean-zero directions, by
      // central differences of the objective.
      const CellField dir = random_mean_zero(g);
      const double eps = 1e-5;
      CellField plus = newton.rho, minus = newton.rho;
      plus.axpy(eps, dir);
      minus.axpy(-eps, dir);
      const double dj = (prob.objective(plus, solver) - prob.objective(minus, solver)) / (2 * eps);
      EXPECT_LE(std::abs(dj), 1e-6 * norm_l2(dir)) << m.describe();
      EXPECT_NEAR(dj, inner(from_vec(g, grad_j), dir), 1e-6);
    }
  }
}

TEST(Solve, ObjectiveGradientMatchesDirectionalDerivative) {
  const Grid g(2, 8);
  const SchemeParams p = params();
  const HelmholtzOps ops(g, p);
  const VariableEllipticSolver solver(g, EllipticOptions{1e-13, 1000});
  const SimState s = random_state(g);
  const DensityProblem prob(s, ops, EntropyModel::classical());
  const CellField rho = random_field(g, 0.7, 1.3);
  const CellField dir = random_mean_zero(g);
  const double eps = 1e-6;
  CellField plus = rho, minus = rho;
  plus.axpy(eps, dir);
  minus.axpy(-eps, dir);
  const double fd = (prob.objective(plus, solver) - prob.objective(minus, solver)) / (2 * eps);
  const double analytic = inner(prob.objective_gradient(rho, solver), dir);
  EXPECT_NEAR(fd, analytic, 1e-6 * std::max(1.0, std::abs(analytic)));
}

TEST(Solve, UniqueFromDifferentGuesses) {
  const Grid g(2, 8);
  const SchemeParams p = params();
  const HelmholtzOps ops(g, p);
  for (const auto& m : models()) {
    const SimState s = random_state(g);
    const DensityProblem prob(s, ops, m);
    const DensitySolution a = solve_density(prob);
    CellField guess = random_field(g, 0.6, 1.6);
    guess += prob.target_mean() - mean(guess);
    const DensitySolution b = solve_density(prob, guess);
    EXPECT_LE(norm_l2(a.rho - b.rho), 10 * p.newton_tol) << m.describe();
  }
}

TEST(Solve, SaturationStaysBelowUpperBound) {
  const Grid g(2, 8);
  const SchemeParams p = params(1e-2);
  const HelmholtzOps ops(g, p);
  const auto sat = EntropyModel::saturation(1.0);
  CellField rho = random_field(g, 0.05, 0.95);
  rho[10] = 0.999;
  rho[11] = 1e-3;
  const SimState s{0.0, rho, rho, random_field(g, -2.0, 2.0), 1};
  const DensitySolution sol = solve_density(DensityProblem(s, ops, sat));
  EXPECT_GT(sol.rho.min(), 0.0);
  EXPECT_LT(sol.rho.max(), 1.0);
}

TEST(Solve, FailuresCarryReports) {
  const Grid g(2, 8);
  const SchemeParams p = params();
  const HelmholtzOps ops(g, p);
  const DensityProblem prob(random_state(g), ops, EntropyModel::classical());
  try {
    solve_density_descent(prob, std::nullopt, 1);
    FAIL() << "expected NonConvergence";
  } catch (const NonConvergence& e) {
    EXPECT_TRUE(e.report().used_fallback);
    EXPECT_EQ(e.report().descent_iterations, 1);
    EXPECT_GT(e.report().final_residual, p.newton_tol);
  }
  CellField bad = random_field(g, 0.5, 1.5);
  bad[0] = -1.0;
  EXPECT_THROW(solve_density(prob, bad), DomainError);
}

TEST(Phi, UpdateSatisfiesTheDiscreteEquation) {
  const Grid g(2, 10);
  const SchemeParams p = params();
  const HelmholtzOps ops(g, p);
  const SimState s = random_state(g);
  const CellField rho_new = random_field(g, 0.5, 1.5);
  const CellField phi = update_phi(rho_new, s, ops, {});
  CellField res = (p.theta / p.dt) * (phi - s.phi_curr);
  res.axpy(-p.mu / 2, laplacian(phi + s.phi_curr));
  res.axpy(p.alpha / 2, phi + s.phi_curr);
  res.axpy(-p.chi / 2, rho_new + s.rho_curr);
  EXPECT_LE(norm_l2(res), 1e-10);

  SchemeParams q = p;
  q.chi = 0.0;
  const HelmholtzOps ops0(g, q);
  const CellField diffused = update_phi(rho_new, s, ops0, {});
  EXPECT_LE(norm_l2(diffused), norm_l2(s.phi_curr));
}

TEST(Stepper, BootstrapAdmissibility) {
  const Grid g(2, 6);
  const Stepper stepper(g, params(), EntropyModel::classical());
  CellField rho(g, 1.0);
  rho[3] = 1e-6;
  const SimState s = stepper.bootstrap(rho, CellField(g));
  EXPECT_EQ(norm_linf(s.rho_prev - s.rho_curr), 0.0);
  const CellField hat = extrapolated_mobility_arg(s.rho_curr, s.rho_prev, params().dt);
  EXPECT_DOUBLE_EQ(hat[0], std::sqrt(1.0 + std::pow(params().dt, 8)));
  rho[3] = 0.0;
  EXPECT_THROW(stepper.bootstrap(rho, CellField(g)), DomainError);
  EXPECT_THROW(Stepper(g, [] { auto p = params(); p.theta = 0.0; return p; }(),
                       EntropyModel::classical()),
               std::invalid_argument);
}

TEST(Stepper, ConstantSteadyStateUnchanged) {
  const Grid g(2, 8);
  const SchemeParams p = params();
  const Stepper stepper(g, p, EntropyModel::classical());
  SimState s = stepper.bootstrap(CellField(g, 0.8), CellField(g, p.chi * 0.8 / p.alpha));
  const SimState s0 = s;
  for (int k = 0; k < 2; ++k) s = stepper.step(s).state;
  EXPECT_LE(norm_linf(s.rho_curr - s0.rho_curr), p.newton_tol);
  EXPECT_LE(norm_linf(s.phi_curr - s0.phi_curr), 1e-12);
  EXPECT_EQ(s.step_index, 2);
  EXPECT_NEAR(s.time, 2 * p.dt, 1e-15);
}

TEST(Stepper, MassPositivityAndEnergyOverManySteps) {
  const Grid g(2, 16);
  const SchemeParams p = params(2e-3);
  for (const auto& m : models()) {
    const Stepper stepper(g, p, m);
    SimState s = stepper.bootstrap(smooth_positive(g, 1.0, 0.8), smooth_positive(g, 0.5, 1.0));
    const double mass0 = mean(s.rho_curr);
    double energy = discrete_energy(s.rho_curr, s.phi_curr, m, p);
    for (int k = 0; k < 100; ++k) {
      const StepResult next = stepper.step(s);
      const DiagnosticsRecord rec = record(s, next.state, next.report, m, p);
      EXPECT_LE(rec.diss_rhs, 0.0);
      EXPECT_LE(rec.diss_lhs, rec.diss_rhs + 100 * p.newton_tol * (1 + std::abs(energy)))
          << m.describe() << " step " << k;
      EXPECT_LE(rec.energy, energy + 100 * p.newton_tol * (1 + std::abs(energy)));
      EXPECT_GT(rec.rho_min, 0.0);
      EXPECT_LT(rec.rho_max, m.upper_bound());
      EXPECT_EQ(norm_linf(next.state.rho_prev - s.rho_curr), 0.0);
      energy = rec.energy;
      s = next.state;
    }
    EXPECT_LE(std::abs(mean(s.rho_curr) - mass0), 1e-12 * mass0) << m.describe();
  }
}

TEST(Stepper, ManufacturedSingleStep) {
  const Grid g(2, 32);
  SchemeParams p;
  p.dt = g.h() / 10;
  const ManufacturedSolution exact(2, p);
  const Stepper stepper(g, p, EntropyModel::classical(), exact.sources());
  const SimState s0 = stepper.bootstrap(exact.sample_rho(g, 0.0), exact.sample_phi(g, 0.0));
  const StepResult r = stepper.step(s0);
  EXPECT_LE(r.report.final_residual, p.newton_tol);
  const ManufacturedErrors err = manufactured_errors(r.state, exact, p.dt);
  EXPECT_LE(err.rho_linf, 5 * (p.dt * p.dt + g.h() * g.h()));
  EXPECT_LE(err.phi_linf, 5 * (p.dt * p.dt + g.h() * g.h()));
  const ManufacturedErrors zero = manufactured_errors(s0, exact, 0.0);
  EXPECT_EQ(zero.rho_linf, 0.0);
  EXPECT_EQ(zero.phi_linf, 0.0);
}
