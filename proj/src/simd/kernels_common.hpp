#pragma once

// Per-cell reference formulas shared by all kernel variants. Vector variants
// use these for boundary cells and loop tails so that every cell is computed
// with the same operation sequence.

#include <cstddef>

namespace chks::simd::detail {

inline double lap1d_cell(const double* u, std::size_t i, std::size_t n,
                         double h) {
  const double right = (i + 1 < n) ? (u[i + 1] - u[i]) / h : 0.0;
  const double left = (i > 0) ? (u[i] - u[i - 1]) / h : 0.0;
  return (right - left) / h;
}

inline double lap2d_cell(const double* u, std::size_t i, std::size_t j,
                         std::size_t nx, std::size_t ny, double hx,
                         double hy) {
  const std::size_t c = j * nx + i;
  const double rx = (i + 1 < nx) ? (u[c + 1] - u[c]) / hx : 0.0;
  const double lx = (i > 0) ? (u[c] - u[c - 1]) / hx : 0.0;
  const double ry = (j + 1 < ny) ? (u[c + nx] - u[c]) / hy : 0.0;
  const double ly = (j > 0) ? (u[c] - u[c - nx]) / hy : 0.0;
  return (rx - lx) / hx + (ry - ly) / hy;
}

}  // namespace chks::simd::detail
