#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "oracle.hpp"
#include "pks/grid.hpp"

using namespace pks;
using namespace pks::testing;

namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

TEST(Grid, Geometry) {
  const Grid g(2, 5, 0.0, 2.0);
  EXPECT_EQ(g.cell_count(), 25u);
  EXPECT_EQ(g.face_count(), 30u);
  EXPECT_DOUBLE_EQ(g.h(), 0.4);
  EXPECT_DOUBLE_EQ(g.center(0), 0.2);
  EXPECT_DOUBLE_EQ(g.domain_volume(), 4.0);
  EXPECT_EQ(g.index(3, 2), 13u);
  const auto c = g.coords(13);
  EXPECT_EQ(c[0], 3);
  EXPECT_EQ(c[1], 2);
  EXPECT_THROW(Grid(1, 4), std::invalid_argument);
  EXPECT_THROW(Grid(2, 0), std::invalid_argument);
}

TEST(Grid, GradOfLinearData) {
  // N = 4 on (0,1), f = (1,2,3,4) along x, constant along y.
  const Grid g(2, 4);
  CellField f(g);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = g.coords(i)[0] + 1.0;
  const FaceField gf = grad(f);
  const auto gx = gf.component(0);
  for (int j = 0; j < 4; ++j)
    for (int m = 0; m <= 4; ++m) {
      const double expected = (m == 0 || m == 4) ? 0.0 : 4.0;
      EXPECT_DOUBLE_EQ(gx[m + 5 * j], expected);
    }
  for (double v : gf.component(1)) EXPECT_EQ(v, 0.0);
}

TEST(Grid, ConstantFields) {
  for (int dim : {2, 3}) {
    const Grid g(dim, 6);
    const CellField c(g, 2.5);
    const FaceField gc = grad(c);
    for (int d = 0; d < dim; ++d)
      for (double v : gc.component(d)) EXPECT_EQ(v, 0.0);
    EXPECT_LE(norm_linf(laplacian(c)), 1e-12);
    const FaceField a = face_average(c);
    for (int d = 0; d < dim; ++d)
      for (double v : a.component(d)) EXPECT_DOUBLE_EQ(v, 2.5);
    EXPECT_EQ(norm_linf(div(FaceField(g))), 0.0);
  }
}

TEST(Grid, FaceAverage) {
  const Grid g(2, 2);
  CellField f(g);
  f[g.index(0, 0)] = 1.0;
  f[g.index(1, 0)] = 3.0;
  f[g.index(0, 1)] = 1.0;
  f[g.index(1, 1)] = 3.0;
  const FaceField avg = face_average(f);
  const auto ax = avg.component(0);
  EXPECT_DOUBLE_EQ(ax[0], 1.0);
  EXPECT_DOUBLE_EQ(ax[1], 2.0);
  EXPECT_DOUBLE_EQ(ax[2], 3.0);

  const Grid g3(3, 5);
  const CellField p = random_field(g3, 1e-3, 1.0);
  EXPECT_GT(face_average(p).min(), 0.0);
}

TEST(Grid, SummationByParts) {
  int instances = 0;
  for (int dim : {2, 3})
    for (int n : {4, 6, 8})
      for (int rep = 0; rep < 34; ++rep, ++instances) {
        const Grid g(dim, n);
        const CellField f = random_field(g);
        const FaceField F = random_flux(g);
        const double lhs = inner(f, div(F));
        const double rhs = -face_inner(grad(f), F);
        const double scale = std::abs(lhs) + norm_l2(f) * std::sqrt(face_inner(F, F));
        EXPECT_LE(std::abs(lhs - rhs), 1e-13 * scale) << "dim " << dim << " N " << n;

        const CellField u = random_field(g);
        const FaceField D = random_coeff(g, 0.1, 3.0);
        const double lhs2 = inner(f, div_coeff(D, grad(u)));
        const double rhs2 = -face_inner(grad(f), hadamard(D, grad(u)));
        const double scale2 = std::abs(lhs2) + norm_l2(f) * norm_l2(div_coeff(D, grad(u)));
        EXPECT_LE(std::abs(lhs2 - rhs2), 1e-13 * scale2) << "dim " << dim << " N " << n;

        EXPECT_LE(std::abs(inner(CellField(g, 1.0), div(F))), 1e-13 * scale);
        EXPECT_LE(std::abs(inner(CellField(g, 1.0), div_coeff(D, grad(u)))), 1e-13 * scale2);
      }
  EXPECT_GE(instances, 200);
}

TEST(Grid, LaplacianMatchesDenseMatrix) {
  for (int dim : {2, 3}) {
    const Grid g(dim, 6);
    const Eigen::MatrixXd L = dense_laplacian(g);
    for (int rep = 0; rep < 5; ++rep) {
      const CellField f = random_field(g);
      const CellField expected = from_vec(g, L * to_vec(f));
      EXPECT_LE(rel_diff(laplacian(f), expected), 1e-13);
      EXPECT_LE(rel_diff(div(grad(f)), expected), 1e-13);
    }
  }
}

TEST(Grid, LaplacianSymmetricNegativeSemidefinite) {
  const Grid g(2, 6);
  const Eigen::MatrixXd L = dense_laplacian(g);
  EXPECT_LE((L - L.transpose()).cwiseAbs().maxCoeff(), 1e-12);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(L);
  const auto& ev = eig.eigenvalues();
  int zero_modes = 0;
  for (int i = 0; i < ev.size(); ++i) {
    EXPECT_LE(ev[i], 1e-10);
    if (std::abs(ev[i]) < 1e-8) ++zero_modes;
  }
  EXPECT_EQ(zero_modes, 1);
  for (int rep = 0; rep < 5; ++rep) {
    const CellField f = random_field(g), u = random_field(g);
    EXPECT_NEAR(inner(f, laplacian(u)), inner(laplacian(f), u),
                1e-13 * norm_l2(f) * norm_l2(laplacian(u)));
  }
}

TEST(Grid, CosineEigenvectors) {
  // Separable cosine products are eigenvectors; the eigenvalue is the sum of
  // the one-dimensional values -(4/h^2) sin^2(k pi h / 2).
  for (int dim : {2, 3}) {
    const int n = dim == 2 ? 8 : 4;
    const Grid g(dim, n);
    const Eigen::MatrixXd L = dense_laplacian(g);
    const std::array<int, 3> k{1, n - 1, 2 % n};
    CellField f(g);
    double lambda = 0.0;
    for (int d = 0; d < dim; ++d) {
      const double s = std::sin(k[d] * kPi * g.h() / 2.0);
      lambda -= 4.0 / (g.h() * g.h()) * s * s;
    }
    for (std::size_t i = 0; i < f.size(); ++i) {
      const auto x = g.position(i);
      double v = 1.0;
      for (int d = 0; d < dim; ++d) v *= std::cos(k[d] * kPi * x[d]);
      f[i] = v;
    }
    const Eigen::VectorXd fv = to_vec(f);
    EXPECT_LE(((L * fv) - lambda * fv).norm(), 1e-10 * std::abs(lambda) * fv.norm());
    EXPECT_LE(rel_diff(laplacian(f), lambda * f), 1e-12);
  }
}

TEST(Grid, OperatorsAreLinear) {
  const Grid g(3, 5);
  const CellField f = random_field(g), u = random_field(g);
  const double a = 0.7, b = -2.3;
  const CellField combo = a * f + b * u;
  EXPECT_LE(rel_diff(laplacian(combo), a * laplacian(f) + b * laplacian(u)), 1e-13);
  const FaceField F = random_flux(g), G = random_flux(g);
  FaceField FG = F;
  FG *= a;
  FaceField Gb = G;
  Gb *= b;
  for (int d = 0; d < 3; ++d)
    for (std::size_t k = 0; k < FG.component(d).size(); ++k)
      FG.component(d)[k] += Gb.component(d)[k];
  EXPECT_LE(rel_diff(div(FG), a * div(F) + b * div(G)), 1e-13);
  const FaceField gc = grad(combo), gf = grad(f), gu = grad(u);
  for (int d = 0; d < 3; ++d)
    for (std::size_t k = 0; k < gc.component(d).size(); ++k)
      EXPECT_NEAR(gc.component(d)[k], a * gf.component(d)[k] + b * gu.component(d)[k], 1e-11);
}

TEST(Grid, DivCoeffRejectsNegativeCoefficient) {
  const Grid g(2, 4);
  FaceField D(g, 1.0);
  const CellField f = random_field(g);
  EXPECT_LE(rel_diff(div_coeff(D, grad(f)), laplacian(f)), 1e-14);
  D.component(1)[3] = -1e-3;
  EXPECT_THROW(div_coeff(D, grad(f)), std::invalid_argument);
}

TEST(Grid, InnerProductsAndNorms) {
  const Grid g(2, 7, 0.0, 1.0);
  EXPECT_NEAR(inner(CellField(g, 1.0), CellField(g, 1.0)), 1.0, 1e-14);
  const Norms two = norms(CellField(g, 2.0));
  EXPECT_NEAR(two.l2, 2.0, 1e-14);
  EXPECT_NEAR(two.mean, 2.0, 1e-14);
  EXPECT_NEAR(two.linf, 2.0, 1e-14);
  EXPECT_EQ(two.grad_l2, 0.0);

  CellField f(g, 0.0);
  f[0] = -3.0;
  f[1] = 1.0;
  EXPECT_EQ(norm_linf(f), 3.0);
  EXPECT_THROW(norm_lp(f, 0.5), std::invalid_argument);
  EXPECT_NEAR(norm_lp(CellField(g, 2.0), 3.0), 2.0, 1e-13);

  const CellField r = random_field(g);
  EXPECT_NEAR(norms(r).grad_l2 * norms(r).grad_l2, face_inner(grad(r), grad(r)), 1e-12);
  EXPECT_GE(face_inner(grad(r), grad(r)), 0.0);

  EXPECT_THROW(inner(CellField(Grid(2, 4)), CellField(Grid(2, 5))), std::invalid_argument);
}

TEST(Grid, FaceInnerBoundaryWeights) {
  // Boundary faces count half, interior faces fully.
  const Grid g(2, 4);
  const FaceField one(g, 1.0);
  const double per_line = 3.0 + 2.0 * 0.5;
  EXPECT_NEAR(face_inner(one, one), 2.0 * 4.0 * per_line * g.cell_volume(), 1e-14);
}

TEST(Grid, MeanRemoval) {
  const Grid g(3, 4);
  CellField f = random_field(g);
  remove_mean(f);
  EXPECT_LE(std::abs(mean(f)), 1e-15);
}
