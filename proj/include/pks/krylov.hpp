#pragma once

#include <functional>

#include "pks/grid.hpp"

namespace pks {

struct KrylovResult {
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

using LinearMap = std::function<CellField(const CellField&)>;

/// Restarted GMRES with right preconditioning for A x = b, starting from
/// x = 0. Stops once ||b - A x|| <= rel_tol ||b|| (discrete l2 norm) or after
/// max_iters matrix-vector products.
KrylovResult gmres(const LinearMap& apply, const LinearMap& precondition, const CellField& rhs,
                   CellField& x, double rel_tol, int max_iters, int restart = 40);

}  // namespace pks
