#pragma once

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

#include "pks/grid.hpp"

namespace pks {

/// Raised when a density value leaves the admissible interval of the
/// entropy model. Carries the offending grid index (npos for scalar calls).
class DomainError : public std::domain_error {
 public:
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  DomainError(const std::string& what, double value, std::size_t index = npos);

  double value() const { return value_; }
  std::size_t index() const { return index_; }

 private:
  double value_;
  std::size_t index_;
};

/// Entropy density f and mobility eta = 1/f'' for the three supported
/// families:
///   Classical        f = rho (ln rho - 1),                  I = (0, inf)
///   BoundedMobility  f = rho (ln rho - 1) + kappa rho^2/2,  I = (0, inf)
///   Saturation       f = rho ln rho + (M - rho) ln(1 - rho/M), I = (0, M)
class EntropyModel {
 public:
  enum class Kind { Classical, BoundedMobility, Saturation };

  static EntropyModel classical();
  static EntropyModel bounded_mobility(double kappa);
  static EntropyModel saturation(double max_density);
  /// Parses `classical`, `bounded(<kappa>)` or `saturation(<M>)`.
  static EntropyModel parse(std::string_view text);

  Kind kind() const { return kind_; }
  /// kappa for BoundedMobility, M for Saturation, 0 for Classical.
  double parameter() const { return param_; }
  /// Upper end of the admissible interval (+inf unless Saturation).
  double upper_bound() const;
  bool admissible(double rho) const;
  std::string describe() const;

  // Closed forms; each throws DomainError outside the admissible interval.
  double f(double rho) const;
  double f1(double rho) const;
  double f2(double rho) const;
  double f3(double rho) const;
  double f4(double rho) const;
  double mobility(double rho) const;

 private:
  EntropyModel(Kind kind, double param) : kind_(kind), param_(param) {}
  void check(double rho) const;

  Kind kind_;
  double param_;
};

// Modified Crank-Nicolson chemical potential
//   S(r, r0) = f'(r) - f''(r)(r - r0)/2 + f'''(r)(r - r0)^2/6
// with r the new density and r0 the old one.

double s_half(double rho_new, double rho_old, const EntropyModel& model);
/// dS/dr = f''/2 - f'''(r - r0)/6 + f''''(r - r0)^2/6, positive on I.
double s_half_derivative(double rho_new, double rho_old, const EntropyModel& model);
/// Antiderivative of S in r (up to a constant in r0):
///   11 f/6 - 5 f'(r - r0)/6 + f''(r - r0)^2/6.
/// Convex in r; this is the pointwise integrand of the step functional.
double s_half_potential(double rho_new, double rho_old, const EntropyModel& model);

/// Pointwise field versions; DomainError carries the offending cell index.
CellField s_half(const CellField& rho_new, const CellField& rho_old, const EntropyModel& model);
CellField s_half_derivative(const CellField& rho_new, const CellField& rho_old,
                            const EntropyModel& model);
CellField mobility(const CellField& rho, const EntropyModel& model);
CellField entropy(const CellField& rho, const EntropyModel& model);

/// Throws DomainError naming the first cell outside the admissible interval.
void require_admissible(const CellField& rho, const EntropyModel& model);

}  // namespace pks
