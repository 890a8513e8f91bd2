#include "pks/krylov.hpp"

#include <cmath>
#include <vector>

namespace pks {

KrylovResult gmres(const LinearMap& apply, const LinearMap& precondition, const CellField& rhs,
                   CellField& x, double rel_tol, int max_iters, int restart) {
  KrylovResult result;
  x = CellField(rhs.grid());
  const double b_norm = norm_l2(rhs);
  if (b_norm == 0.0) {
    result.converged = true;
    return result;
  }

  CellField r = rhs;
  double beta = b_norm;
  while (result.iterations < max_iters) {
    const int m = restart;
    std::vector<CellField> v;
    std::vector<CellField> z;
    v.reserve(m + 1);
    z.reserve(m);
    std::vector<std::vector<double>> hess(m + 1, std::vector<double>(m, 0.0));
    std::vector<double> cs(m, 0.0), sn(m, 0.0), g(m + 1, 0.0);

    v.push_back((1.0 / beta) * r);
    g[0] = beta;
    int k = 0;
    for (; k < m && result.iterations < max_iters; ++k) {
      z.push_back(precondition(v[k]));
      CellField w = apply(z[k]);
      ++result.iterations;
      // Modified Gram-Schmidt.
      for (int i = 0; i <= k; ++i) {
        hess[i][k] = inner(w, v[i]);
        w.axpy(-hess[i][k], v[i]);
      }
      hess[k + 1][k] = norm_l2(w);
      if (hess[k + 1][k] > 0.0) w *= 1.0 / hess[k + 1][k];
      v.push_back(std::move(w));

      for (int i = 0; i < k; ++i) {
        const double t = cs[i] * hess[i][k] + sn[i] * hess[i + 1][k];
        hess[i + 1][k] = -sn[i] * hess[i][k] + cs[i] * hess[i + 1][k];
        hess[i][k] = t;
      }
      const double denom = std::hypot(hess[k][k], hess[k + 1][k]);
      cs[k] = denom > 0.0 ? hess[k][k] / denom : 1.0;
      sn[k] = denom > 0.0 ? hess[k + 1][k] / denom : 0.0;
      hess[k][k] = denom;
      hess[k + 1][k] = 0.0;
      g[k + 1] = -sn[k] * g[k];
      g[k] = cs[k] * g[k];
      if (std::abs(g[k + 1]) <= rel_tol * b_norm) {
        ++k;
        break;
      }
    }

    // Back substitution for the least-squares coefficients.
    std::vector<double> y(k, 0.0);
    for (int i = k - 1; i >= 0; --i) {
      double s = g[i];
      for (int j = i + 1; j < k; ++j) s -= hess[i][j] * y[j];
      y[i] = s / hess[i][i];
    }
    for (int i = 0; i < k; ++i) x.axpy(y[i], z[i]);

    r = rhs - apply(x);
    beta = norm_l2(r);
    result.relative_residual = beta / b_norm;
    if (result.relative_residual <= rel_tol) {
      result.converged = true;
      break;
    }
  }
  return result;
}

}  // namespace pks
