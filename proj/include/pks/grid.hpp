#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace pks {

/// Uniform cell-centered grid on the box (origin, origin+length)^dim with N
/// cells per axis. Cell (i, j, k), 0-based, has center origin + (i + 1/2) h.
///
/// Cell layout is axis-major with x fastest:
///   index(i, j, k) = i + N * (j + N * k).
/// Face arrays for axis d use the same ordering with the d-coordinate running
/// over 0..N (N+1 faces); face m of axis d sits between cells m-1 and m.
class Grid {
 public:
  Grid(int dim, int n, double origin = 0.0, double length = 1.0);

  int dim() const { return dim_; }
  int n() const { return n_; }
  double origin() const { return origin_; }
  double length() const { return length_; }
  double h() const { return h_; }

  std::size_t cell_count() const { return cell_count_; }
  /// Faces per axis, boundary faces included.
  std::size_t face_count() const { return face_count_; }
  /// h^dim, the weight of the discrete inner product.
  double cell_volume() const { return cell_volume_; }
  double domain_volume() const;

  double center(int i) const { return origin_ + (i + 0.5) * h_; }
  std::size_t index(int i, int j, int k = 0) const;
  std::array<int, 3> coords(std::size_t index) const;
  /// Physical coordinates of a cell center (unused axes are 0).
  std::array<double, 3> position(std::size_t index) const;

  /// Cell stride along axis d, i.e. N^d.
  std::size_t stride(int axis) const { return strides_[axis]; }
  /// Number of cell lines orthogonal to the sweep along axis d that sit
  /// "above" it in the layout, i.e. N^(dim-1-d).
  std::size_t outer(int axis) const;

  bool operator==(const Grid& other) const;

 private:
  int dim_;
  int n_;
  double origin_;
  double length_;
  double h_;
  std::size_t cell_count_;
  std::size_t face_count_;
  double cell_volume_;
  std::array<std::size_t, 3> strides_{};
};

/// Scalar grid function at cell centers.
class CellField {
 public:
  explicit CellField(const Grid& grid, double value = 0.0);
  CellField(const Grid& grid, std::vector<double> values);

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  double min() const;
  double max() const;
  bool all_finite() const;

  CellField& operator+=(const CellField& other);
  CellField& operator-=(const CellField& other);
  CellField& operator*=(double s);
  CellField& operator+=(double s);
  /// this += s * other
  CellField& axpy(double s, const CellField& other);

 private:
  Grid grid_;
  std::vector<double> values_;
};

CellField operator+(CellField a, const CellField& b);
CellField operator-(CellField a, const CellField& b);
CellField operator*(double s, CellField a);
/// Pointwise product.
CellField hadamard(CellField a, const CellField& b);

/// Face-centered vector grid function, one component array per axis.
class FaceField {
 public:
  explicit FaceField(const Grid& grid, double value = 0.0);

  const Grid& grid() const { return grid_; }

  std::span<double> component(int axis) { return comps_[axis]; }
  std::span<const double> component(int axis) const { return comps_[axis]; }

  double min() const;
  FaceField& operator*=(double s);

 private:
  Grid grid_;
  std::array<std::vector<double>, 3> comps_;
};

/// Pointwise product of two face fields.
FaceField hadamard(FaceField a, const FaceField& b);

// ---------------------------------------------------------------------------
// Difference and average operators. Homogeneous Neumann closure: the ghost
// value mirrors the adjacent cell, so gradients vanish on boundary faces.

FaceField grad(const CellField& f);
CellField div(const FaceField& flux);
CellField laplacian(const CellField& f);
/// Interior faces take the mean of the two neighbours; boundary faces take
/// the adjacent cell value.
FaceField face_average(const CellField& f);
/// Divergence of D * G. Throws std::invalid_argument if any D entry is
/// negative.
CellField div_coeff(const FaceField& coeff, const FaceField& g);

/// h^dim sum of f * g. Throws std::invalid_argument on grid mismatch.
double inner(const CellField& f, const CellField& g);
/// Face inner product <a_d(F G), 1> summed over axes. Collapsing the cell
/// average onto faces gives weight 1 to interior faces and 1/2 to boundary
/// faces; fluxes with Neumann closure have zero boundary entries, so the
/// summation-by-parts identity <f, div F> = -[grad f, F] holds exactly.
double face_inner(const FaceField& f, const FaceField& g);

struct Norms {
  double l2 = 0.0;
  double lp = 0.0;
  double linf = 0.0;
  double grad_l2 = 0.0;
  double mean = 0.0;
};

/// All standard discrete norms of f; `lp` uses exponent p >= 1.
Norms norms(const CellField& f, double p = 1.0);
double norm_l2(const CellField& f);
double norm_lp(const CellField& f, double p);
double norm_linf(const CellField& f);
double mean(const CellField& f);
/// Subtracts the mean in place.
void remove_mean(CellField& f);

}  // namespace pks
