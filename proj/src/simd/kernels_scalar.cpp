// Copyright 2026 The sdsmi Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "sdsmi/simd/kernels.hpp"

namespace sdsmi::simd {
namespace {

double gauss_dot_scalar(double u0, double du, double inv_two_w2, const double* w,
                        std::size_t n) {
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double u = u0 + static_cast<double>(k) * du;
    acc += std::exp(-u * u * inv_two_w2) * w[k];
  }
  return acc;
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) acc += a[k] * b[k];
  return acc;
}

void matvec_scalar(const double* k, std::size_t rows, std::size_t cols, const double* x,
                   double* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = dot_scalar(k + r * cols, x, cols);
}

void vexp_scalar(const double* x, double* y, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) y[k] = std::exp(x[k]);
}

inline double stage_node(const ExplicitStage& s, std::size_t i, double left, double right) {
  const double p = s.psi[i];
  const double reaction = -s.b[i] * p - s.half_sigma[i] * p * s.quad[i];
  const double transport = s.g[i] * (right - left) * s.inv_two_dx;
  const double lap = (right - 2.0 * p + left) * s.inv_dx2;
  return p + s.dt * reaction + transport + s.diff_weight * s.dt * s.half_a[i] * lap;
}

void explicit_stage_scalar(const ExplicitStage& s) {
  const std::size_t n = s.psi.size();
  if (n == 1) {
    s.out[0] = stage_node(s, 0, s.psi[0], s.psi[0]);
    return;
  }
  s.out[0] = stage_node(s, 0, s.psi[1], s.psi[1]);
  for (std::size_t i = 1; i + 1 < n; ++i) s.out[i] = stage_node(s, i, s.psi[i - 1], s.psi[i + 1]);
  s.out[n - 1] = stage_node(s, n - 1, s.psi[n - 2], s.psi[n - 2]);
}

constexpr KernelTable kScalar{gauss_dot_scalar, dot_scalar, matvec_scalar, vexp_scalar,
                              explicit_stage_scalar};

}  // namespace

const KernelTable& scalar_kernels() noexcept { return kScalar; }

}  // namespace sdsmi::simd
