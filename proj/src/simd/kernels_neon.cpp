#include "chks/simd/kernels.hpp"

#include <arm_neon.h>

#include "kernels_common.hpp"

// Two float64x2 registers carry the four canonical partial sums (lanes 0,1 and
// 2,3), so the reduction order matches the scalar reference.

namespace chks::simd {
namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t lo = vdupq_n_f64(0.0);
  float64x2_t hi = vdupq_n_f64(0.0);
  const std::size_t n4 = n - n % 4;
  for (std::size_t i = 0; i < n4; i += 4) {
    lo = vaddq_f64(lo, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    hi = vaddq_f64(hi, vmulq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2)));
  }
  double s = (vgetq_lane_f64(lo, 0) + vgetq_lane_f64(lo, 1)) +
             (vgetq_lane_f64(hi, 0) + vgetq_lane_f64(hi, 1));
  for (std::size_t i = n4; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sum_neon(const double* a, std::size_t n) {
  float64x2_t lo = vdupq_n_f64(0.0);
  float64x2_t hi = vdupq_n_f64(0.0);
  const std::size_t n4 = n - n % 4;
  for (std::size_t i = 0; i < n4; i += 4) {
    lo = vaddq_f64(lo, vld1q_f64(a + i));
    hi = vaddq_f64(hi, vld1q_f64(a + i + 2));
  }
  double s = (vgetq_lane_f64(lo, 0) + vgetq_lane_f64(lo, 1)) +
             (vgetq_lane_f64(hi, 0) + vgetq_lane_f64(hi, 1));
  for (std::size_t i = n4; i < n; ++i) s += a[i];
  return s;
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  const std::size_t n2 = n - n % 2;
  for (std::size_t i = 0; i < n2; i += 2) {
    vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vmulq_f64(va, vld1q_f64(x + i))));
  }
  for (std::size_t i = n2; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

void xpay_neon(const double* x, double beta, double* y, std::size_t n) {
  const float64x2_t vb = vdupq_n_f64(beta);
  const std::size_t n2 = n - n % 2;
  for (std::size_t i = 0; i < n2; i += 2) {
    vst1q_f64(y + i, vaddq_f64(vld1q_f64(x + i), vmulq_f64(vb, vld1q_f64(y + i))));
  }
  for (std::size_t i = n2; i < n; ++i) y[i] = x[i] + beta * y[i];
}

void diff_scaled_neon(const double* hi, const double* lo, double* out,
                      std::size_t n, double h) {
  const float64x2_t vh = vdupq_n_f64(h);
  const std::size_t n2 = n - n % 2;
  for (std::size_t i = 0; i < n2; i += 2) {
    vst1q_f64(out + i, vdivq_f64(vsubq_f64(vld1q_f64(hi + i), vld1q_f64(lo + i)), vh));
  }
  for (std::size_t i = n2; i < n; ++i) out[i] = (hi[i] - lo[i]) / h;
}

void laplacian_1d_neon(const double* u, double* out, std::size_t n, double h) {
  if (n < 4) {
    for (std::size_t i = 0; i < n; ++i) out[i] = detail::lap1d_cell(u, i, n, h);
    return;
  }
  const float64x2_t vh = vdupq_n_f64(h);
  out[0] = detail::lap1d_cell(u, 0, n, h);
  std::size_t i = 1;
  for (; i + 2 <= n - 1; i += 2) {
    const float64x2_t c = vld1q_f64(u + i);
    const float64x2_t right = vdivq_f64(vsubq_f64(vld1q_f64(u + i + 1), c), vh);
    const float64x2_t left = vdivq_f64(vsubq_f64(c, vld1q_f64(u + i - 1)), vh);
    vst1q_f64(out + i, vdivq_f64(vsubq_f64(right, left), vh));
  }
  for (; i < n; ++i) out[i] = detail::lap1d_cell(u, i, n, h);
}

void laplacian_2d_neon(const double* u, double* out, std::size_t nx,
                       std::size_t ny, double hx, double hy) {
  const float64x2_t vhx = vdupq_n_f64(hx);
  const float64x2_t vhy = vdupq_n_f64(hy);
  const float64x2_t zero = vdupq_n_f64(0.0);
  for (std::size_t j = 0; j < ny; ++j) {
    const double* row = u + j * nx;
    double* orow = out + j * nx;
    const bool has_up = j + 1 < ny;
    const bool has_down = j > 0;
    std::size_t i = 0;
    if (nx >= 4) {
      orow[0] = detail::lap2d_cell(u, 0, j, nx, ny, hx, hy);
      for (i = 1; i + 2 <= nx - 1; i += 2) {
        const float64x2_t c = vld1q_f64(row + i);
        const float64x2_t rx = vdivq_f64(vsubq_f64(vld1q_f64(row + i + 1), c), vhx);
        const float64x2_t lx = vdivq_f64(vsubq_f64(c, vld1q_f64(row + i - 1)), vhx);
        const float64x2_t ry =
            has_up ? vdivq_f64(vsubq_f64(vld1q_f64(row + nx + i), c), vhy) : zero;
        const float64x2_t ly =
            has_down ? vdivq_f64(vsubq_f64(c, vld1q_f64(row - nx + i)), vhy) : zero;
        const float64x2_t xpart = vdivq_f64(vsubq_f64(rx, lx), vhx);
        const float64x2_t ypart = vdivq_f64(vsubq_f64(ry, ly), vhy);
        vst1q_f64(orow + i, vaddq_f64(xpart, ypart));
      }
    }
    for (; i < nx; ++i) orow[i] = detail::lap2d_cell(u, i, j, nx, ny, hx, hy);
  }
}

}  // namespace

const KernelTable* neon_kernels() {
  static const KernelTable table{
      "neon",          dot_neon,          sum_neon,          axpy_neon,
      xpay_neon,       diff_scaled_neon,  laplacian_1d_neon, laplacian_2d_neon};
  return &table;
}

}  // namespace chks::simd
