#include "chks/simd/kernels.hpp"

#include <immintrin.h>

#include <array>

#include "kernels_common.hpp"

#define CHKS_AVX2 __attribute__((target("avx2")))

namespace chks::simd {
namespace {

CHKS_AVX2 double hsum_canonical(__m256d acc) {
  alignas(32) std::array<double, 4> lane{};
  _mm256_store_pd(lane.data(), acc);
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

CHKS_AVX2 double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  const std::size_t n4 = n - n % 4;
  for (std::size_t i = 0; i < n4; i += 4) {
    const __m256d prod = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_add_pd(acc, prod);
  }
  double s = hsum_canonical(acc);
  for (std::size_t i = n4; i < n; ++i) s += a[i] * b[i];
  return s;
}

CHKS_AVX2 double sum_avx2(const double* a, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  const std::size_t n4 = n - n % 4;
  for (std::size_t i = 0; i < n4; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
  double s = hsum_canonical(acc);
  for (std::size_t i = n4; i < n; ++i) s += a[i];
  return s;
}

CHKS_AVX2 void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  const std::size_t n4 = n - n % 4;
  for (std::size_t i = 0; i < n4; i += 4) {
    const __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
  }
  for (std::size_t i = n4; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

CHKS_AVX2 void xpay_avx2(const double* x, double beta, double* y, std::size_t n) {
  const __m256d vb = _mm256_set1_pd(beta);
  const std::size_t n4 = n - n % 4;
  for (std::size_t i = 0; i < n4; i += 4) {
    const __m256d prod = _mm256_mul_pd(vb, _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(x + i), prod));
  }
  for (std::size_t i = n4; i < n; ++i) y[i] = x[i] + beta * y[i];
}

CHKS_AVX2 void diff_scaled_avx2(const double* hi, const double* lo, double* out,
                                std::size_t n, double h) {
  const __m256d vh = _mm256_set1_pd(h);
  const std::size_t n4 = n - n % 4;
  for (std::size_t i = 0; i < n4; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(hi + i), _mm256_loadu_pd(lo + i));
    _mm256_storeu_pd(out + i, _mm256_div_pd(d, vh));
  }
  for (std::size_t i = n4; i < n; ++i) out[i] = (hi[i] - lo[i]) / h;
}

CHKS_AVX2 void laplacian_1d_avx2(const double* u, double* out, std::size_t n, double h) {
  if (n < 6) {
    for (std::size_t i = 0; i < n; ++i) out[i] = detail::lap1d_cell(u, i, n, h);
    return;
  }
  const __m256d vh = _mm256_set1_pd(h);
  out[0] = detail::lap1d_cell(u, 0, n, h);
  std::size_t i = 1;
  for (; i + 4 <= n - 1; i += 4) {
    const __m256d c = _mm256_loadu_pd(u + i);
    const __m256d right = _mm256_div_pd(_mm256_sub_pd(_mm256_loadu_pd(u + i + 1), c), vh);
    const __m256d left = _mm256_div_pd(_mm256_sub_pd(c, _mm256_loadu_pd(u + i - 1)), vh);
    _mm256_storeu_pd(out + i, _mm256_div_pd(_mm256_sub_pd(right, left), vh));
  }
  for (; i < n; ++i) out[i] = detail::lap1d_cell(u, i, n, h);
}

CHKS_AVX2 void laplacian_2d_avx2(const double* u, double* out, std::size_t nx,
                                 std::size_t ny, double hx, double hy) {
  const __m256d vhx = _mm256_set1_pd(hx);
  const __m256d vhy = _mm256_set1_pd(hy);
  const __m256d zero = _mm256_setzero_pd();
  for (std::size_t j = 0; j < ny; ++j) {
    const double* row = u + j * nx;
    double* orow = out + j * nx;
    const bool has_up = j + 1 < ny;
    const bool has_down = j > 0;
    std::size_t i = 0;
    if (nx >= 6) {
      orow[0] = detail::lap2d_cell(u, 0, j, nx, ny, hx, hy);
      for (i = 1; i + 4 <= nx - 1; i += 4) {
        const __m256d c = _mm256_loadu_pd(row + i);
        const __m256d rx = _mm256_div_pd(_mm256_sub_pd(_mm256_loadu_pd(row + i + 1), c), vhx);
        const __m256d lx = _mm256_div_pd(_mm256_sub_pd(c, _mm256_loadu_pd(row + i - 1)), vhx);
        const __m256d ry = has_up
            ? _mm256_div_pd(_mm256_sub_pd(_mm256_loadu_pd(row + nx + i), c), vhy)
            : zero;
        const __m256d ly = has_down
            ? _mm256_div_pd(_mm256_sub_pd(c, _mm256_loadu_pd(row - nx + i)), vhy)
            : zero;
        const __m256d xpart = _mm256_div_pd(_mm256_sub_pd(rx, lx), vhx);
        const __m256d ypart = _mm256_div_pd(_mm256_sub_pd(ry, ly), vhy);
        _mm256_storeu_pd(orow + i, _mm256_add_pd(xpart, ypart));
      }
    }
    for (; i < nx; ++i) orow[i] = detail::lap2d_cell(u, i, j, nx, ny, hx, hy);
  }
}

}  // namespace

const KernelTable* avx2_kernels() {
  static const KernelTable table{
      "avx2",          dot_avx2,          sum_avx2,         axpy_avx2,
      xpay_avx2,       diff_scaled_avx2,  laplacian_1d_avx2, laplacian_2d_avx2};
  static const bool supported = __builtin_cpu_supports("avx2");
  return supported ? &table : nullptr;
}

}  // namespace chks::simd
