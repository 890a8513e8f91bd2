#include "pks/params.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace pks {

double SchemeParams::stabilization_coefficient() const {
  const double chi2 = chi * chi;
  if (stabilization == Stabilization::Damped) return chi2 * dt / (4.0 * theta + 2.0 * alpha * dt);
  return chi2 * dt / (4.0 * theta);
}

void SchemeParams::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("scheme parameters: " + what); };
  for (double v : {gamma, chi, theta, mu, alpha, dt, newton_tol, safeguard_sigma, elliptic.tol})
    if (!std::isfinite(v)) fail("all values must be finite");
  if (!(theta > 0.0)) fail("theta must be positive");
  if (!(dt > 0.0)) fail("dt must be positive");
  if (!(gamma > 0.0)) fail("gamma must be positive");
  if (!(mu > 0.0)) fail("mu must be positive");
  if (alpha < 0.0) fail("alpha must be nonnegative");
  if (!(newton_tol > 0.0)) fail("newton.tol must be positive");
  if (newton_max_iters < 1) fail("newton.max_iters must be at least 1");
  if (!(safeguard_sigma > 0.0 && safeguard_sigma < 1.0)) fail("safeguard.sigma must lie in (0, 1)");
  if (!(elliptic.tol > 0.0)) fail("elliptic.tol must be positive");
  if (elliptic.max_iters < 1) fail("elliptic.max_iters must be at least 1");
}

}  // namespace pks
