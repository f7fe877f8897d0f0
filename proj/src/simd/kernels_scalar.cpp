#include "chks/simd/kernels.hpp"

#include "kernels_common.hpp"

namespace chks::simd {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  const std::size_t n4 = n - n % 4;
  for (std::size_t i = 0; i < n4; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  double s = (s0 + s1) + (s2 + s3);
  for (std::size_t i = n4; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sum_scalar(const double* a, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  const std::size_t n4 = n - n % 4;
  for (std::size_t i = 0; i < n4; i += 4) {
    s0 += a[i];
    s1 += a[i + 1];
    s2 += a[i + 2];
    s3 += a[i + 3];
  }
  double s = (s0 + s1) + (s2 + s3);
  for (std::size_t i = n4; i < n; ++i) s += a[i];
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

void xpay_scalar(const double* x, double beta, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + beta * y[i];
}

void diff_scaled_scalar(const double* hi, const double* lo, double* out,
                        std::size_t n, double h) {
  for (std::size_t i = 0; i < n; ++i) out[i] = (hi[i] - lo[i]) / h;
}

void laplacian_1d_scalar(const double* u, double* out, std::size_t n,
                         double h) {
  for (std::size_t i = 0; i < n; ++i) out[i] = detail::lap1d_cell(u, i, n, h);
}

void laplacian_2d_scalar(const double* u, double* out, std::size_t nx,
                         std::size_t ny, double hx, double hy) {
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      out[j * nx + i] = detail::lap2d_cell(u, i, j, nx, ny, hx, hy);
    }
  }
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{
      "scalar",           dot_scalar,          sum_scalar,
      axpy_scalar,        xpay_scalar,         diff_scaled_scalar,
      laplacian_1d_scalar, laplacian_2d_scalar};
  return table;
}

}  // namespace chks::simd
