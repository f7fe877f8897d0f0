#include "chks/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "chks/error.hpp"
#include "chks/simd/kernels.hpp"

namespace chks {

namespace {

const simd::KernelTable& kt() { return simd::active_kernels(); }

void require_same_grid(const GridSpec& a, const GridSpec& b) {
  if (!(a == b)) throw Error(ErrorCode::InvalidArgument, "fields live on different grids");
}

}  // namespace

GridSpec GridSpec::line(int n, double length) {
  GridSpec g;
  g.dim = 1;
  g.cells = {n, 1};
  g.lengths = {length, 1.0};
  g.validate();
  return g;
}

GridSpec GridSpec::rect(int nx, int ny, double lx, double ly) {
  GridSpec g;
  g.dim = 2;
  g.cells = {nx, ny};
  g.lengths = {lx, ly};
  g.validate();
  return g;
}

void GridSpec::validate() const {
  if (dim != 1 && dim != 2) {
    throw Error(ErrorCode::InvalidArgument, "dim must be 1 or 2, got " + std::to_string(dim));
  }
  for (int a = 0; a < dim; ++a) {
    if (cells[a] < 1) throw Error(ErrorCode::InvalidArgument, "cell counts must be positive");
    if (!(lengths[a] > 0.0) || !std::isfinite(lengths[a])) {
      throw Error(ErrorCode::InvalidArgument, "domain lengths must be positive");
    }
  }
}

std::array<double, 2> GridSpec::center(std::size_t cell) const {
  const std::size_t i = cell % static_cast<std::size_t>(nx());
  const std::size_t j = cell / static_cast<std::size_t>(nx());
  const double x = (static_cast<double>(i) + 0.5) * spacing(0);
  const double y = dim == 2 ? (static_cast<double>(j) + 0.5) * spacing(1) : 0.0;
  return {x, y};
}

std::vector<Face> faces(const GridSpec& grid) {
  std::vector<Face> out;
  out.reserve(grid.num_faces());
  const auto nx = static_cast<std::uint32_t>(grid.nx());
  const auto ny = static_cast<std::uint32_t>(grid.ny());
  for (std::uint32_t j = 0; j < ny; ++j) {
    for (std::uint32_t i = 0; i + 1 < nx; ++i) out.push_back({j * nx + i, j * nx + i + 1, 0});
  }
  if (grid.dim == 2) {
    for (std::uint32_t j = 0; j + 1 < ny; ++j) {
      for (std::uint32_t i = 0; i < nx; ++i) out.push_back({j * nx + i, (j + 1) * nx + i, 1});
    }
  }
  return out;
}

Field::Field(const GridSpec& grid, double value) : grid_(grid), values_(grid.size(), value) {
  grid_.validate();
}

Field::Field(const GridSpec& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  grid_.validate();
  if (values_.size() != grid_.size()) {
    throw Error(ErrorCode::InvalidArgument, "value count does not match the grid");
  }
}

Field Field::from_function(const GridSpec& grid,
                           const std::function<double(double, double)>& f) {
  Field out(grid);
  for (std::size_t c = 0; c < out.size(); ++c) {
    const auto x = grid.center(c);
    out[c] = f(x[0], x[1]);
  }
  return out;
}

bool Field::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double Field::min() const { return *std::min_element(values_.begin(), values_.end()); }
double Field::max() const { return *std::max_element(values_.begin(), values_.end()); }

Field& Field::operator+=(const Field& other) {
  require_same_grid(grid_, other.grid_);
  kt().axpy(1.0, other.data(), data(), size());
  return *this;
}

Field& Field::operator-=(const Field& other) {
  require_same_grid(grid_, other.grid_);
  kt().axpy(-1.0, other.data(), data(), size());
  return *this;
}

Field& Field::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

Field laplacian(const Field& u) {
  const GridSpec& g = u.grid();
  Field out(g);
  if (g.dim == 1) {
    kt().laplacian_1d(u.data(), out.data(), g.size(), g.spacing(0));
  } else {
    kt().laplacian_2d(u.data(), out.data(), static_cast<std::size_t>(g.nx()),
                      static_cast<std::size_t>(g.ny()), g.spacing(0), g.spacing(1));
  }
  return out;
}

FaceField grad(const Field& u) {
  const GridSpec& g = u.grid();
  FaceField out(g);
  const auto nx = static_cast<std::size_t>(g.nx());
  const auto ny = static_cast<std::size_t>(g.ny());
  const double hx = g.spacing(0);
  for (std::size_t j = 0; j < ny; ++j) {
    const double* row = u.data() + j * nx;
    kt().diff_scaled(row + 1, row, out.values.data() + j * (nx - 1), nx - 1, hx);
  }
  if (g.dim == 2 && ny > 1) {
    double* gy = out.values.data() + g.num_x_faces();
    kt().diff_scaled(u.data() + nx, u.data(), gy, nx * (ny - 1), g.spacing(1));
  }
  return out;
}

Field div(const FaceField& flux) {
  const GridSpec& g = flux.grid;
  Field out(g);
  const auto nx = static_cast<std::size_t>(g.nx());
  const auto ny = static_cast<std::size_t>(g.ny());
  const double hx = g.spacing(0);
  const double* fx = flux.values.data();
  const double* fy = fx + g.num_x_faces();
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      const double rx = (i + 1 < nx) ? fx[j * (nx - 1) + i] : 0.0;
      const double lx = (i > 0) ? fx[j * (nx - 1) + i - 1] : 0.0;
      double v = (rx - lx) / hx;
      if (g.dim == 2) {
        const double hy = g.spacing(1);
        const double ry = (j + 1 < ny) ? fy[j * nx + i] : 0.0;
        const double ly = (j > 0) ? fy[(j - 1) * nx + i] : 0.0;
        v = v + (ry - ly) / hy;
      }
      out[j * nx + i] = v;
    }
  }
  return out;
}

double integrate(const Field& u) { return kt().sum(u.data(), u.size()) * u.grid().cell_volume(); }

double inner(const Field& u, const Field& v) {
  require_same_grid(u.grid(), v.grid());
  return kt().dot(u.data(), v.data(), u.size()) * u.grid().cell_volume();
}

double face_inner(const FaceField& a, const FaceField& b) {
  require_same_grid(a.grid, b.grid);
  return kt().dot(a.values.data(), b.values.data(), a.values.size()) * a.grid.cell_volume();
}

double mean(const Field& u) { return kt().sum(u.data(), u.size()) / static_cast<double>(u.size()); }

Field zero_mean(Field u) {
  const double m = mean(u);
  for (double& v : u.values()) v -= m;
  return u;
}

Field inv_neumann_laplacian(const Field& f, const KrylovOptions& opts, KrylovStats* stats) {
  const GridSpec& g = f.grid();
  const std::size_t n = f.size();
  const auto& k = kt();

  const double rms = std::sqrt(k.dot(f.data(), f.data(), n) / static_cast<double>(n));
  const double m = mean(f);
  if (std::abs(m) > 1e-10 * rms) {
    throw Error(ErrorCode::NonZeroMean,
                "right-hand side has mean " + std::to_string(m) + " (rms " + std::to_string(rms) + ")");
  }

  Field x(g);
  Field r = zero_mean(f);
  const double bnorm = std::sqrt(k.dot(r.data(), r.data(), n));
  if (stats) *stats = {};
  if (bnorm == 0.0) return x;

  Field p = r;
  double rr = k.dot(r.data(), r.data(), n);
  const int max_iters = opts.max_iters > 0 ? opts.max_iters : static_cast<int>(10 * n);
  for (int it = 1; it <= max_iters; ++it) {
    Field ap = laplacian(p);
    ap *= -1.0;
    const double pap = k.dot(p.data(), ap.data(), n);
    if (!(pap > 0.0)) break;
    const double alpha = rr / pap;
    k.axpy(alpha, p.data(), x.data(), n);
    k.axpy(-alpha, ap.data(), r.data(), n);
    r = zero_mean(std::move(r));
    const double rr_new = k.dot(r.data(), r.data(), n);
    const double rel = std::sqrt(rr_new) / bnorm;
    if (stats) *stats = {it, rel};
    if (rel <= opts.rel_tol) return zero_mean(std::move(x));
    k.xpay(r.data(), rr_new / rr, p.data(), n);
    rr = rr_new;
  }
  throw Error(ErrorCode::SolverDiverged,
              "Neumann CG did not reach relative residual " + std::to_string(opts.rel_tol));
}

double v0dual_norm_sq(const Field& f, const KrylovOptions& opts) {
  const Field u = inv_neumann_laplacian(f, opts);
  return inner(f, u);
}

}  // namespace chks
