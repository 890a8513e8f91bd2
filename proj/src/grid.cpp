#include "pks/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace pks {

namespace {

std::size_t ipow(std::size_t base, int exp) {
  std::size_t r = 1;
  for (int e = 0; e < exp; ++e) r *= base;
  return r;
}

void require_same_grid(const Grid& a, const Grid& b, const char* what) {
  if (!(a == b)) throw std::invalid_argument(std::string(what) + ": grid mismatch");
}

// Calls fn(cell_index, face_index_of_left_face) for every cell, sweeping
// along `axis`. The right face of the cell is face_index + stride.
template <class Fn>
void sweep_cells(const Grid& g, int axis, Fn&& fn) {
  const std::size_t n = g.n();
  const std::size_t stride = g.stride(axis);
  const std::size_t outer = g.outer(axis);
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t in = 0; in < stride; ++in) {
      const std::size_t cell0 = in + stride * n * o;
      const std::size_t face0 = in + stride * (n + 1) * o;
      for (std::size_t i = 0; i < n; ++i) fn(cell0 + stride * i, face0 + stride * i, stride);
    }
  }
}

// Calls fn(face_index, m, left_cell, right_cell) for every face of `axis`,
// with m in 0..N; the neighbouring cell indices are only valid for interior
// faces.
template <class Fn>
void sweep_faces(const Grid& g, int axis, Fn&& fn) {
  const std::size_t n = g.n();
  const std::size_t stride = g.stride(axis);
  const std::size_t outer = g.outer(axis);
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t in = 0; in < stride; ++in) {
      const std::size_t cell0 = in + stride * n * o;
      const std::size_t face0 = in + stride * (n + 1) * o;
      for (std::size_t m = 0; m <= n; ++m) {
        const std::size_t left = m > 0 ? cell0 + stride * (m - 1) : cell0;
        const std::size_t right = m < n ? cell0 + stride * m : cell0 + stride * (n - 1);
        fn(face0 + stride * m, m, left, right);
      }
    }
  }
}

}  // namespace

Grid::Grid(int dim, int n, double origin, double length)
    : dim_(dim), n_(n), origin_(origin), length_(length) {
  if (dim != 2 && dim != 3) throw std::invalid_argument("Grid: dim must be 2 or 3");
  if (n < 1) throw std::invalid_argument("Grid: N must be positive");
  if (!(length > 0.0) || !std::isfinite(length) || !std::isfinite(origin))
    throw std::invalid_argument("Grid: extent must be positive and finite");
  h_ = length / n;
  cell_count_ = ipow(n, dim);
  face_count_ = (static_cast<std::size_t>(n) + 1) * ipow(n, dim - 1);
  cell_volume_ = std::pow(h_, dim);
  for (int d = 0; d < 3; ++d) strides_[d] = ipow(n, d);
}

double Grid::domain_volume() const { return std::pow(length_, dim_); }

std::size_t Grid::index(int i, int j, int k) const {
  return static_cast<std::size_t>(i) + static_cast<std::size_t>(n_) *
                                           (static_cast<std::size_t>(j) +
                                            static_cast<std::size_t>(n_) * static_cast<std::size_t>(k));
}

std::array<int, 3> Grid::coords(std::size_t index) const {
  std::array<int, 3> c{0, 0, 0};
  for (int d = 0; d < dim_; ++d) {
    c[d] = static_cast<int>(index % n_);
    index /= n_;
  }
  return c;
}

std::array<double, 3> Grid::position(std::size_t index) const {
  const auto c = coords(index);
  std::array<double, 3> x{0.0, 0.0, 0.0};
  for (int d = 0; d < dim_; ++d) x[d] = center(c[d]);
  return x;
}

std::size_t Grid::outer(int axis) const { return ipow(n_, dim_ - 1 - axis); }

bool Grid::operator==(const Grid& other) const {
  return dim_ == other.dim_ && n_ == other.n_ && origin_ == other.origin_ &&
         length_ == other.length_;
}

// ---------------------------------------------------------------------------

CellField::CellField(const Grid& grid, double value)
    : grid_(grid), values_(grid.cell_count(), value) {}

CellField::CellField(const Grid& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.cell_count())
    throw std::invalid_argument("CellField: value count does not match grid");
}

double CellField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double CellField::max() const { return *std::max_element(values_.begin(), values_.end()); }

bool CellField::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

CellField& CellField::operator+=(const CellField& other) { return axpy(1.0, other); }
CellField& CellField::operator-=(const CellField& other) { return axpy(-1.0, other); }

CellField& CellField::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

CellField& CellField::operator+=(double s) {
  for (double& v : values_) v += s;
  return *this;
}

CellField& CellField::axpy(double s, const CellField& other) {
  require_same_grid(grid_, other.grid_, "CellField::axpy");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += s * other.values_[i];
  return *this;
}

CellField operator+(CellField a, const CellField& b) { return a += b; }
CellField operator-(CellField a, const CellField& b) { return a -= b; }
CellField operator*(double s, CellField a) { return a *= s; }

CellField hadamard(CellField a, const CellField& b) {
  require_same_grid(a.grid(), b.grid(), "hadamard");
  for (std::size_t i = 0; i < a.size(); ++i) a[i] *= b[i];
  return a;
}

FaceField::FaceField(const Grid& grid, double value) : grid_(grid) {
  for (int d = 0; d < grid.dim(); ++d) comps_[d].assign(grid.face_count(), value);
}

double FaceField::min() const {
  double m = comps_[0].empty() ? 0.0 : comps_[0][0];
  for (int d = 0; d < grid_.dim(); ++d)
    for (double v : comps_[d]) m = std::min(m, v);
  return m;
}

FaceField& FaceField::operator*=(double s) {
  for (int d = 0; d < grid_.dim(); ++d)
    for (double& v : comps_[d]) v *= s;
  return *this;
}

FaceField hadamard(FaceField a, const FaceField& b) {
  require_same_grid(a.grid(), b.grid(), "hadamard");
  for (int d = 0; d < a.grid().dim(); ++d) {
    auto x = a.component(d);
    auto y = b.component(d);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] *= y[i];
  }
  return a;
}

// ---------------------------------------------------------------------------

FaceField grad(const CellField& f) {
  const Grid& g = f.grid();
  FaceField out(g);
  const double inv_h = 1.0 / g.h();
  const std::size_t n = g.n();
  for (int d = 0; d < g.dim(); ++d) {
    auto c = out.component(d);
    sweep_faces(g, d, [&](std::size_t face, std::size_t m, std::size_t left, std::size_t right) {
      c[face] = (m == 0 || m == n) ? 0.0 : (f[right] - f[left]) * inv_h;
    });
  }
  return out;
}

CellField div(const FaceField& flux) {
  const Grid& g = flux.grid();
  CellField out(g);
  const double inv_h = 1.0 / g.h();
  for (int d = 0; d < g.dim(); ++d) {
    auto c = flux.component(d);
    sweep_cells(g, d, [&](std::size_t cell, std::size_t face, std::size_t stride) {
      out[cell] += (c[face + stride] - c[face]) * inv_h;
    });
  }
  return out;
}

CellField laplacian(const CellField& f) { return div(grad(f)); }

FaceField face_average(const CellField& f) {
  const Grid& g = f.grid();
  FaceField out(g);
  for (int d = 0; d < g.dim(); ++d) {
    auto c = out.component(d);
    sweep_faces(g, d, [&](std::size_t face, std::size_t, std::size_t left, std::size_t right) {
      c[face] = 0.5 * (f[left] + f[right]);
    });
  }
  return out;
}

CellField div_coeff(const FaceField& coeff, const FaceField& g) {
  require_same_grid(coeff.grid(), g.grid(), "div_coeff");
  for (int d = 0; d < coeff.grid().dim(); ++d)
    for (double v : coeff.component(d))
      if (v < 0.0 || std::isnan(v))
        throw std::invalid_argument("div_coeff: negative face coefficient " + std::to_string(v));
  return div(hadamard(coeff, g));
}

double inner(const CellField& f, const CellField& g) {
  require_same_grid(f.grid(), g.grid(), "inner");
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * g[i];
  return s * f.grid().cell_volume();
}

double face_inner(const FaceField& f, const FaceField& g) {
  require_same_grid(f.grid(), g.grid(), "face_inner");
  const Grid& grid = f.grid();
  const std::size_t n = grid.n();
  double s = 0.0;
  for (int d = 0; d < grid.dim(); ++d) {
    auto a = f.component(d);
    auto b = g.component(d);
    sweep_faces(grid, d, [&](std::size_t face, std::size_t m, std::size_t, std::size_t) {
      const double w = (m == 0 || m == n) ? 0.5 : 1.0;
      s += w * a[face] * b[face];
    });
  }
  return s * grid.cell_volume();
}

double norm_l2(const CellField& f) { return std::sqrt(inner(f, f)); }

double norm_lp(const CellField& f, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("norm_lp: p must be >= 1");
  double s = 0.0;
  for (double v : f.values()) s += std::pow(std::abs(v), p);
  return std::pow(s * f.grid().cell_volume(), 1.0 / p);
}

double norm_linf(const CellField& f) {
  double m = 0.0;
  for (double v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

double mean(const CellField& f) {
  double s = 0.0;
  for (double v : f.values()) s += v;
  return s / static_cast<double>(f.size());
}

void remove_mean(CellField& f) { f += -mean(f); }

Norms norms(const CellField& f, double p) {
  Norms r;
  r.l2 = norm_l2(f);
  r.lp = norm_lp(f, p);
  r.linf = norm_linf(f);
  const FaceField gf = grad(f);
  r.grad_l2 = std::sqrt(face_inner(gf, gf));
  r.mean = mean(f);
  return r;
}

}  // namespace pks
