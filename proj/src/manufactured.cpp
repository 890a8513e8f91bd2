#include "pks/manufactured.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace pks {

namespace {

constexpr double kPi = std::numbers::pi;

struct Profile {
  double value;     // u
  double dt;        // u_t
  double lap;       // Laplacian of u
  double grad_sq;   // |grad u|^2
};

Profile profile(int dim, const std::array<double, 3>& x, double t) {
  const double e = 0.1 * std::exp(-t);
  double c = 1.0;
  for (int d = 0; d < dim; ++d) c *= std::cos(kPi * x[d]);
  double grad_sq = 0.0;
  for (int d = 0; d < dim; ++d) {
    double g = -kPi * e * std::sin(kPi * x[d]);
    for (int o = 0; o < dim; ++o)
      if (o != d) g *= std::cos(kPi * x[o]);
    grad_sq += g * g;
  }
  return {e * c + 0.2, -e * c, -dim * kPi * kPi * e * c, grad_sq};
}

}  // namespace

double ManufacturedSolution::rho(const std::array<double, 3>& x, double t) const {
  return profile(dim_, x, t).value;
}

double ManufacturedSolution::f1(const std::array<double, 3>& x, double t) const {
  // With rho = phi = u:  div(rho grad phi) = |grad u|^2 + u Lap u.
  const Profile u = profile(dim_, x, t);
  return u.dt - params_.gamma * u.lap + params_.chi * (u.grad_sq + u.value * u.lap);
}

double ManufacturedSolution::f2(const std::array<double, 3>& x, double t) const {
  const Profile u = profile(dim_, x, t);
  return params_.theta * u.dt - params_.mu * u.lap + params_.alpha * u.value -
         params_.chi * u.value;
}

SourceTerms ManufacturedSolution::sources() const {
  const ManufacturedSolution self = *this;
  return {[self](const std::array<double, 3>& x, double t) { return self.f1(x, t); },
          [self](const std::array<double, 3>& x, double t) { return self.f2(x, t); }};
}

CellField ManufacturedSolution::sample_rho(const Grid& grid, double t) const {
  CellField out(grid);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = rho(grid.position(i), t);
  return out;
}

ManufacturedErrors manufactured_errors(const SimState& state, const ManufacturedSolution& exact,
                                       double t) {
  const Grid& grid = state.rho_curr.grid();
  ManufacturedErrors err;
  for (std::size_t i = 0; i < state.rho_curr.size(); ++i) {
    const auto x = grid.position(i);
    err.rho_linf = std::max(err.rho_linf, std::abs(state.rho_curr[i] - exact.rho(x, t)));
    err.phi_linf = std::max(err.phi_linf, std::abs(state.phi_curr[i] - exact.phi(x, t)));
  }
  return err;
}

}  // namespace pks
