#pragma once

namespace pks {

/// Stopping rule for the variable-coefficient elliptic solver.
struct EllipticOptions {
  double tol = 1e-10;  // relative residual ||L_D u - g|| / ||g||
  int max_iters = 500;
};

/// Which stabilization coefficient multiplies (rho^{n+1} - rho^n):
/// Standard uses chi^2 dt / (4 theta), Damped uses chi^2 dt / (4 theta + 2 alpha dt).
enum class Stabilization { Standard, Damped };

struct SchemeParams {
  double gamma = 1.0;
  double chi = 1.0;
  double theta = 1.0;
  double mu = 1.0;
  double alpha = 1.0;
  double dt = 1e-3;
  Stabilization stabilization = Stabilization::Standard;

  // Nonlinear density solve. The Newton residual is measured in density
  // units (dt times the rate residual) and converged once its l2 norm is
  // below newton_tol * max(1, ||rho^n||_2).
  double newton_tol = 1e-11;
  int newton_max_iters = 50;
  /// Admissible steps keep rho_new >= (1 - sigma) rho_current pointwise.
  double safeguard_sigma = 0.9;

  EllipticOptions elliptic{};

  double stabilization_coefficient() const;
  /// Throws std::invalid_argument naming the first offending field.
  void validate() const;
};

}  // namespace pks
