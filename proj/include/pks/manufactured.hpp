#pragma once

#include <array>

#include "pks/grid.hpp"
#include "pks/params.hpp"
#include "pks/scheme.hpp"

namespace pks {

/// Smooth exact solution on the unit box for accuracy studies,
///   rho_e = phi_e = 0.1 exp(-t) prod_d cos(pi x_d) + 0.2,
/// together with the sources that make it solve the classical system
///   rho_t = gamma Lap rho - chi div(rho grad phi) + f1
///   theta phi_t = mu Lap phi - alpha phi + chi rho + f2.
class ManufacturedSolution {
 public:
  ManufacturedSolution(int dim, const SchemeParams& params) : dim_(dim), params_(params) {}

  double rho(const std::array<double, 3>& x, double t) const;
  double phi(const std::array<double, 3>& x, double t) const { return rho(x, t); }
  double f1(const std::array<double, 3>& x, double t) const;
  double f2(const std::array<double, 3>& x, double t) const;

  SourceTerms sources() const;
  CellField sample_rho(const Grid& grid, double t) const;
  CellField sample_phi(const Grid& grid, double t) const { return sample_rho(grid, t); }

 private:
  int dim_;
  SchemeParams params_;
};

struct ManufacturedErrors {
  double rho_linf = 0.0;
  double phi_linf = 0.0;
};

/// Max-norm errors against the exact solution sampled at cell centers.
ManufacturedErrors manufactured_errors(const SimState& state, const ManufacturedSolution& exact,
                                       double t);

}  // namespace pks
