// Copyright 2026 The sdsmi Authors
// SPDX-License-Identifier: Apache-2.0

#include "sdsmi/grid_ops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sdsmi/error.hpp"
#include "sdsmi/simd/kernels.hpp"

namespace sdsmi {

void solve_tridiagonal(std::span<const double> lower, std::span<double> diag,
                       std::span<const double> upper, std::span<double> rhs) {
  const std::size_t n = diag.size();
  if (n == 0) return;
  for (std::size_t i = 1; i < n; ++i) {
    const double w = lower[i] / diag[i - 1];
    diag[i] -= w * upper[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  rhs[n - 1] /= diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
}

std::vector<double> trapezoid_weights(std::size_t n, double dx) {
  std::vector<double> w(n, dx);
  if (n > 0) {
    w.front() = 0.5 * dx;
    w.back() = 0.5 * dx;
  }
  return w;
}

double l2_norm(std::span<const double> v, double dx) {
  const std::size_t n = v.size();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = (i == 0 || i + 1 == n) ? 0.5 : 1.0;
    s += w * v[i] * v[i];
  }
  return std::sqrt(s * dx);
}

std::vector<double> heat_matrix(std::size_t n, double dx, double variance) {
  if (!(variance > 0.0)) raise(ErrorKind::InvalidArgument, "heat kernel variance must be positive");
  const auto w = trapezoid_weights(n, dx);
  std::vector<double> m(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double d = static_cast<double>(static_cast<long long>(i) - static_cast<long long>(k)) * dx;
      const double v = std::exp(-d * d / (2.0 * variance)) * w[k];
      m[i * n + k] = v;
      row += v;
    }
    for (std::size_t k = 0; k < n; ++k) m[i * n + k] /= row;
  }
  return m;
}

std::vector<double> kde_matrix(std::size_t n, double dx, double bandwidth) {
  if (!(bandwidth > 0.0)) raise(ErrorKind::InvalidArgument, "bandwidth must be positive");
  const auto w = trapezoid_weights(n, dx);
  const double norm = 1.0 / (bandwidth * std::sqrt(2.0 * std::numbers::pi));
  std::vector<double> m(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      const double d = static_cast<double>(static_cast<long long>(i) - static_cast<long long>(k)) * dx;
      m[i * n + k] = norm * std::exp(-d * d / (2.0 * bandwidth * bandwidth)) * w[k];
    }
  return m;
}

std::vector<double> apply_matrix(const std::vector<double>& m, std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<double> y(n);
  simd::matvec(m, n, n, x, y);
  return y;
}

std::vector<double> cic_density(std::span<const double> xs, std::span<const double> ws, double x0,
                                double dx, std::size_t n) {
  std::vector<double> mass(n, 0.0);
  for (std::size_t p = 0; p < xs.size(); ++p) {
    double pos = (xs[p] - x0) / dx;
    pos = std::clamp(pos, 0.0, static_cast<double>(n - 1));
    std::size_t i = static_cast<std::size_t>(pos);
    if (i >= n - 1) i = n - 2;
    const double f = pos - static_cast<double>(i);
    mass[i] += (1.0 - f) * ws[p];
    mass[i + 1] += f * ws[p];
  }
  const auto w = trapezoid_weights(n, dx);
  for (std::size_t i = 0; i < n; ++i) mass[i] /= w[i];
  return mass;
}

double w1_cloud_density(std::vector<double> xs, double x0, double dx, std::span<const double> v) {
  const std::size_t n = v.size();
  if (xs.empty() || n < 2) raise(ErrorKind::InvalidArgument, "w1 needs points and a density");
  std::sort(xs.begin(), xs.end());
  // Density CDF at nodes (exact for the piecewise-linear interpolant).
  std::vector<double> F(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) F[i] = F[i - 1] + 0.5 * dx * (v[i - 1] + v[i]);
  const double total = F[n - 1];
  if (!(total > 0.0)) raise(ErrorKind::InvalidArgument, "w1 density has zero mass");
  for (double& f : F) f /= total;
  const double wp = 1.0 / static_cast<double>(xs.size());

  // Integrate |F_d - F_e| over [lo, hi] on the merged breakpoints. Within a
  // piece F_e is constant and F_d is approximated linearly.
  const double lo = std::min(x0, xs.front());
  const double hi = std::max(x0 + static_cast<double>(n - 1) * dx, xs.back());
  auto Fd = [&](double x) {
    const double pos = (x - x0) / dx;
    if (pos <= 0.0) return 0.0;
    if (pos >= static_cast<double>(n - 1)) return 1.0;
    const std::size_t i = static_cast<std::size_t>(pos);
    const double f = pos - static_cast<double>(i);
    // Quadratic within the cell from the linear density.
    const double a = v[i], b = v[i + 1];
    return F[i] + dx * (a * f + 0.5 * (b - a) * f * f) / total;
  };
  std::vector<double> br;
  br.reserve(xs.size() + n + 2);
  br.push_back(lo);
  for (std::size_t i = 0; i < n; ++i) br.push_back(x0 + static_cast<double>(i) * dx);
  for (double x : xs) br.push_back(x);
  br.push_back(hi);
  std::sort(br.begin(), br.end());
  double acc = 0.0;
  std::size_t below = 0;
  for (std::size_t k = 0; k + 1 < br.size(); ++k) {
    const double a = br[k], b = br[k + 1];
    while (below < xs.size() && xs[below] <= a) ++below;
    if (!(b > a)) continue;
    const double Fe = static_cast<double>(below) * wp;
    // Simpson on |Fd - Fe| (Fd is smooth within a piece).
    const double m = 0.5 * (a + b);
    const double ya = std::fabs(Fd(a) - Fe), ym = std::fabs(Fd(m) - Fe), yb = std::fabs(Fd(b) - Fe);
    acc += (b - a) * (ya + 4.0 * ym + yb) / 6.0;
  }
  return acc;
}

}  // namespace sdsmi
