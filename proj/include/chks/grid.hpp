#pragma once

// Uniform cell-centered finite-volume grid on a box with homogeneous Neumann
// boundary conditions. Cells are stored row-major (x fastest). Interior faces
// are stored x-normal faces first, then y-normal faces; boundary faces carry
// zero flux and are not stored.

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace chks {

struct GridSpec {
  int dim = 1;
  std::array<int, 2> cells{1, 1};
  std::array<double, 2> lengths{1.0, 1.0};

  static GridSpec line(int n, double length);
  static GridSpec rect(int nx, int ny, double lx, double ly);

  // Throws InvalidArgument unless dim in {1,2} and all extents are positive.
  void validate() const;

  int nx() const { return cells[0]; }
  int ny() const { return dim == 2 ? cells[1] : 1; }
  std::size_t size() const { return static_cast<std::size_t>(nx()) * ny(); }
  double spacing(int axis) const { return lengths[axis] / cells[axis]; }
  double cell_volume() const { return dim == 2 ? spacing(0) * spacing(1) : spacing(0); }
  double volume() const { return dim == 2 ? lengths[0] * lengths[1] : lengths[0]; }

  std::size_t num_x_faces() const { return static_cast<std::size_t>(nx() - 1) * ny(); }
  std::size_t num_y_faces() const {
    return dim == 2 ? static_cast<std::size_t>(nx()) * (ny() - 1) : 0;
  }
  std::size_t num_faces() const { return num_x_faces() + num_y_faces(); }

  std::array<double, 2> center(std::size_t cell) const;

  friend bool operator==(const GridSpec& a, const GridSpec& b) {
    return a.dim == b.dim && a.nx() == b.nx() && a.ny() == b.ny() &&
           a.lengths[0] == b.lengths[0] && (a.dim == 1 || a.lengths[1] == b.lengths[1]);
  }
};

// Interior face between cells `left` (lower index) and `right`, normal to `axis`.
struct Face {
  std::uint32_t left;
  std::uint32_t right;
  int axis;
};

// Faces in storage order of FaceField.
std::vector<Face> faces(const GridSpec& grid);

class Field {
 public:
  Field() = default;
  explicit Field(const GridSpec& grid, double value = 0.0);
  Field(const GridSpec& grid, std::vector<double> values);

  static Field from_function(const GridSpec& grid,
                             const std::function<double(double, double)>& f);

  const GridSpec& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  bool all_finite() const;
  double min() const;
  double max() const;

  Field& operator+=(const Field& other);
  Field& operator-=(const Field& other);
  Field& operator*=(double s);

  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(double s, Field a) { return a *= s; }

  friend bool operator==(const Field& a, const Field& b) {
    return a.grid_ == b.grid_ && a.values_ == b.values_;
  }

 private:
  GridSpec grid_{};
  std::vector<double> values_;
};

struct FaceField {
  GridSpec grid{};
  std::vector<double> values;  // x faces, then y faces

  explicit FaceField(const GridSpec& g, double value = 0.0)
      : grid(g), values(g.num_faces(), value) {}
};

// Discrete calculus. div(grad(u)) and laplacian(u) agree bitwise.
Field laplacian(const Field& u);
FaceField grad(const Field& u);
Field div(const FaceField& flux);

// Midpoint quadrature over cells, and over faces with the dual-cell weight.
double integrate(const Field& u);
double inner(const Field& u, const Field& v);
double face_inner(const FaceField& a, const FaceField& b);
double mean(const Field& u);

struct KrylovOptions {
  double rel_tol = 1e-10;
  int max_iters = 0;  // 0 means 10 * cell count
};

struct KrylovStats {
  int iterations = 0;
  double rel_residual = 0.0;
};

// Zero-mean solution of -laplacian(u) = f. Requires |mean(f)| <= 1e-10 * rms(f).
// Throws NonZeroMean or SolverDiverged.
Field inv_neumann_laplacian(const Field& f, const KrylovOptions& opts = {},
                            KrylovStats* stats = nullptr);

// <f, (-laplacian)^{-1} f>, the squared dual norm on zero-mean fields.
double v0dual_norm_sq(const Field& f, const KrylovOptions& opts = {});

// Subtracts the cell mean.
Field zero_mean(Field u);

}  // namespace chks
