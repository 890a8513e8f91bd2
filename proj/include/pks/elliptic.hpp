#pragma once

#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "pks/grid.hpp"
#include "pks/params.hpp"

namespace pks {

/// Cosine transform that diagonalizes the cell-centered Neumann Laplacian.
/// Forward is the (unnormalized) DCT-II along every axis, inverse the
/// matching DCT-III scaled so that inverse(forward(x)) == x.
///
/// Plans are created once (FFTW_ESTIMATE, deterministic) and shared between
/// copies; every call uses its own scratch buffer, so const methods are
/// reentrant.
class CosineTransform {
 public:
  explicit CosineTransform(const Grid& grid);

  const Grid& grid() const { return grid_; }

  void forward(std::span<const double> in, std::span<double> out) const;
  void inverse(std::span<const double> in, std::span<double> out) const;

  /// Eigenvalues of the discrete Laplacian per mode, in layout order:
  ///   lambda_k = -(4/h^2) sum_d sin^2(k_d pi / (2N)) <= 0.
  std::span<const double> laplacian_symbol() const { return symbol_; }

  /// Applies the diagonal-in-mode operator with the given per-mode multiplier.
  CellField apply_multiplier(const CellField& f, std::span<const double> multiplier) const;

 private:
  struct Plans;

  Grid grid_;
  std::shared_ptr<const Plans> plans_;
  std::vector<double> symbol_;
};

/// Direct inverse of -Delta_h on mean-zero grid functions.
class PoissonSolver {
 public:
  explicit PoissonSolver(const Grid& grid);
  explicit PoissonSolver(std::shared_ptr<const CosineTransform> transform);

  /// Solves -Delta_h u = g with mean(u) = 0. Throws std::invalid_argument if
  /// |mean(g)| > 1e-12 ||g||_2.
  CellField solve(const CellField& g) const;

  const CosineTransform& transform() const { return *transform_; }

 private:
  std::shared_ptr<const CosineTransform> transform_;
  std::vector<double> inverse_symbol_;
};

CellField solve_poisson_neumann(const CellField& g);
/// ||g||_{-1,h} = sqrt(<g, (-Delta_h)^{-1} g>) for mean-zero g.
double norm_hm1(const CellField& g);

/// The two constant-coefficient operators of the chemoattractant update,
///   L1 = theta/dt + alpha/2 - (mu/2) Delta_h
///   L2 = theta/dt - alpha/2 + (mu/2) Delta_h,
/// and G_h = c_stab - (chi^2/4) L1^{-1}, with c_stab the configured
/// stabilization coefficient.
class HelmholtzOps {
 public:
  HelmholtzOps(const Grid& grid, const SchemeParams& params);

  const Grid& grid() const { return transform_->grid(); }
  const SchemeParams& params() const { return params_; }
  const CosineTransform& transform() const { return *transform_; }
  std::shared_ptr<const CosineTransform> shared_transform() const { return transform_; }

  CellField apply_L1(const CellField& f) const;
  CellField apply_L2(const CellField& f) const;
  CellField solve_L1(const CellField& g) const;
  CellField apply_Gh(const CellField& f) const;

  /// Per-mode symbols, in transform layout.
  std::span<const double> l1_symbol() const { return l1_symbol_; }
  std::span<const double> gh_symbol() const { return gh_symbol_; }

 private:
  SchemeParams params_;
  std::shared_ptr<const CosineTransform> transform_;
  std::vector<double> l1_symbol_;
  std::vector<double> l1_inverse_;
  std::vector<double> gh_symbol_;
};

struct EllipticSolveReport {
  int iterations = 0;
  double final_residual_l2 = 0.0;  // relative: ||L_D u - g|| / ||g||
  bool converged = false;
};

class EllipticSolveError : public std::runtime_error {
 public:
  EllipticSolveError(const std::string& what, EllipticSolveReport report)
      : std::runtime_error(what), report_(report) {}
  const EllipticSolveReport& report() const { return report_; }

 private:
  EllipticSolveReport report_;
};

struct EllipticSolution {
  CellField u;
  EllipticSolveReport report;
};

/// L_D f = -div(D grad f).
CellField apply_variable_elliptic(const FaceField& coeff, const CellField& f);

/// Preconditioned conjugate gradient for L_D u = g on mean-zero functions.
/// The preconditioner is the DCT Poisson inverse scaled by 1/mean(D).
class VariableEllipticSolver {
 public:
  VariableEllipticSolver(const Grid& grid, EllipticOptions options = {});
  VariableEllipticSolver(std::shared_ptr<const CosineTransform> transform,
                         EllipticOptions options = {});

  /// Requires D > 0 on interior faces and mean-zero g. Throws
  /// EllipticSolveError on non-convergence, std::invalid_argument on bad input.
  EllipticSolution solve(const FaceField& coeff, const CellField& g) const;

  const EllipticOptions& options() const { return options_; }

 private:
  PoissonSolver poisson_;
  EllipticOptions options_;
};

/// ||g||_{L_D^{-1}} = sqrt(<g, L_D^{-1} g>).
double norm_weighted_hm1(const VariableEllipticSolver& solver, const FaceField& coeff,
                         const CellField& g);

}  // namespace pks
