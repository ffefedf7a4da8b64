// Copyright 2026 The sdsmi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Data-parallel inner loops. Each kernel has a scalar reference
// implementation and, on x86-64, an AVX2+FMA variant. The variant is chosen
// once at runtime from the CPU features; tests pin both and compare them.

#include <cstddef>
#include <span>
#include <string_view>

namespace sdsmi::simd {

enum class Isa { Scalar, Avx2 };

std::string_view isa_name(Isa isa) noexcept;

/// Best ISA supported by both the build and the running CPU.
Isa detected_isa() noexcept;

/// ISA currently used by the dispatching entry points.
Isa active_isa() noexcept;

/// Selects the ISA. Throws InvalidArgument if unavailable. Not meant to be
/// called while kernels run on other threads.
void set_isa(Isa isa);

/// Explicit Euler stage of the log-Laplace stepper on grid nodes:
///   out = psi + dt*(-b*psi - half_sigma*psi*quad) + g*(psi[i+1]-psi[i-1])/(2dx)
///         + diff_weight*dt*half_a*(psi[i+1]-2psi[i]+psi[i-1])/dx^2
/// with mirrored ghost nodes (zero Neumann) at both ends.
struct ExplicitStage {
  std::span<const double> psi;
  std::span<const double> b;
  std::span<const double> half_sigma;
  std::span<const double> quad;  // multiplies half_sigma*psi, e.g. psi itself
  std::span<const double> g;     // stochastic transport coefficient
  std::span<const double> half_a;
  double dt = 0.0;
  double inv_two_dx = 0.0;
  double inv_dx2 = 0.0;
  double diff_weight = 0.0;
  std::span<double> out;
};

struct KernelTable {
  double (*gauss_dot)(double u0, double du, double inv_two_w2, const double* w, std::size_t n);
  double (*dot)(const double* a, const double* b, std::size_t n);
  void (*matvec)(const double* k, std::size_t rows, std::size_t cols, const double* x,
                 double* y);
  void (*vexp)(const double* x, double* y, std::size_t n);
  void (*explicit_stage)(const ExplicitStage& s);
};

const KernelTable& scalar_kernels() noexcept;
#if defined(SDSMI_HAVE_AVX2)
const KernelTable& avx2_kernels() noexcept;
#endif
const KernelTable& kernels() noexcept;

/// sum_k exp(-(u0 + k*du)^2 * inv_two_w2) * w[k]
inline double gauss_dot(double u0, double du, double inv_two_w2, std::span<const double> w) {
  return kernels().gauss_dot(u0, du, inv_two_w2, w.data(), w.size());
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  return kernels().dot(a.data(), b.data(), a.size() < b.size() ? a.size() : b.size());
}

/// y = K x with K row-major rows x cols.
inline void matvec(std::span<const double> k, std::size_t rows, std::size_t cols,
                   std::span<const double> x, std::span<double> y) {
  kernels().matvec(k.data(), rows, cols, x.data(), y.data());
}

inline void vexp(std::span<const double> x, std::span<double> y) {
  kernels().vexp(x.data(), y.data(), x.size());
}

inline void explicit_stage(const ExplicitStage& s) { kernels().explicit_stage(s); }

}  // namespace sdsmi::simd
