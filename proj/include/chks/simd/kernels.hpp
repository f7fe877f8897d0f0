#pragma once

// Data-parallel inner loops used by the grid operators and the Krylov solver.
//
// Every variant performs the same sequence of IEEE operations per element, and
// reductions use one canonical order (four interleaved partial sums combined as
// (s0 + s1) + (s2 + s3), then the tail in index order). Results are therefore
// bitwise identical across the scalar reference and the vector variants, which
// is what the equivalence tests check.

#include <cstddef>
#include <string_view>

namespace chks::simd {

struct KernelTable {
  std::string_view name;

  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sum)(const double* a, std::size_t n);

  // y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // y[i] = x[i] + beta * y[i]
  void (*xpay)(const double* x, double beta, double* y, std::size_t n);
  // out[i] = (hi[i] - lo[i]) / h
  void (*diff_scaled)(const double* hi, const double* lo, double* out,
                      std::size_t n, double h);

  // Homogeneous-Neumann 3-point / 5-point Laplacian in flux form:
  // ((u[i+1]-u[i])/h - (u[i]-u[i-1])/h) / h with the boundary flux set to 0.
  void (*laplacian_1d)(const double* u, double* out, std::size_t n, double h);
  void (*laplacian_2d)(const double* u, double* out, std::size_t nx,
                       std::size_t ny, double hx, double hy);
};

const KernelTable& scalar_kernels();

// nullptr when the variant is not compiled in or the CPU lacks support.
const KernelTable* avx2_kernels();
const KernelTable* neon_kernels();

// Selected once on first use: best supported variant, unless the environment
// variable CHKS_SIMD is set to "scalar", "avx2" or "neon".
const KernelTable& active_kernels();

}  // namespace chks::simd
