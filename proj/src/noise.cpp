// Copyright 2026 The sdsmi Authors
// SPDX-License-Identifier: Apache-2.0

#include "sdsmi/noise.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "sdsmi/error.hpp"
#include "sdsmi/rng.hpp"

namespace sdsmi {
namespace {

std::size_t integral_ratio(double num, double den, const char* what) {
  const double r = num / den;
  const double k = std::round(r);
  if (!(k >= 1.0) || std::fabs(r - k) > 1e-9 * std::max(1.0, k)) {
    std::ostringstream os;
    os << what << " = " << r << " is not a positive integer";
    raise(ErrorKind::InvalidArgument, os.str());
  }
  return static_cast<std::size_t>(k);
}

}  // namespace

NoiseGrid make_noise_grid(double t1, double dt, double L, double dy) {
  if (!(dt > 0.0) || !(dy > 0.0) || !(L > 0.0) || !(t1 > 0.0))
    raise(ErrorKind::InvalidArgument, "noise grid needs t1, dt, L, dy > 0");
  NoiseGrid g;
  g.dt = dt;
  g.L = L;
  g.nt = integral_ratio(t1, dt, "t1/dt");
  g.ny = integral_ratio(2.0 * L, dy, "2L/dy");
  return g;
}

std::size_t time_index(const NoiseGrid& grid, double t) {
  const double r = t / grid.dt;
  const double k = std::round(r);
  if (!(k >= 0.0) || std::fabs(r - k) > 1e-9 * std::max(1.0, k) ||
      k > static_cast<double>(grid.nt)) {
    std::ostringstream os;
    os << "t = " << t << " is not a grid time of dt = " << grid.dt << " within [0, "
       << grid.t1() << "]";
    raise(ErrorKind::OffGridTime, os.str());
  }
  return static_cast<std::size_t>(k);
}

NoisePath::NoisePath(NoiseGrid grid, std::uint64_t seed, std::vector<double> increments)
    : grid_(grid), seed_(seed), inc_(std::move(increments)) {
  if (inc_.size() != grid_.nt * grid_.ny)
    raise(ErrorKind::InvalidArgument, "increment array does not match the grid");
}

NoisePath sample_path(const NoiseGrid& grid, std::uint64_t seed, std::uint64_t budget_bytes) {
  if (grid.nt == 0 || grid.ny == 0 || !(grid.dt > 0.0))
    raise(ErrorKind::InvalidArgument, "empty noise grid");
  const long double bytes = static_cast<long double>(grid.nt) * grid.ny * sizeof(double);
  if (bytes > static_cast<long double>(budget_bytes)) {
    std::ostringstream os;
    os << "noise array needs " << static_cast<double>(bytes) << " bytes, budget is "
       << budget_bytes;
    raise(ErrorKind::GridOverflow, os.str());
  }
  const double scale = std::sqrt(grid.dt * grid.dy());
  std::vector<double> inc(grid.nt * grid.ny);
  const Philox4x64::Key key{seed, static_cast<std::uint64_t>(StreamTag::Noise)};
  for (std::size_t i = 0; i < grid.nt; ++i) {
    for (std::size_t j = 0; j < grid.ny; ++j) {
      const auto block = Philox4x64::generate({i, j, 0, 0}, key);
      inc[i * grid.ny + j] = scale * normal_from_bits(block[0], block[1]);
    }
  }
  return NoisePath(grid, seed, std::move(inc));
}

NoisePath zero_path(const NoiseGrid& grid) {
  return NoisePath(grid, 0, std::vector<double>(grid.nt * grid.ny, 0.0));
}

NoisePath reverse_path(const NoisePath& path, double t) {
  const NoiseGrid& g = path.grid();
  const std::size_t k = time_index(g, t);
  NoiseGrid out = g;
  out.nt = k;
  std::vector<double> inc(k * g.ny);
  for (std::size_t i = 0; i < k; ++i) {
    const auto src = path.row(k - 1 - i);
    for (std::size_t j = 0; j < g.ny; ++j) inc[i * g.ny + j] = -src[j];
  }
  return NoisePath(out, path.seed(), std::move(inc));
}

NoisePath negate_path(const NoisePath& path) {
  std::vector<double> inc = path.increments();
  for (double& v : inc) v = -v;
  return NoisePath(path.grid(), path.seed(), std::move(inc));
}

double integrate(const NoisePath& path, const std::function<double(double, double)>& f,
                 double r, double t) {
  const NoiseGrid& g = path.grid();
  const std::size_t i0 = time_index(g, r);
  const std::size_t i1 = time_index(g, t);
  if (i1 < i0) raise(ErrorKind::InvalidArgument, "integrate needs r <= t");
  double acc = 0.0;
  for (std::size_t i = i0; i < i1; ++i) {
    const double s = static_cast<double>(i) * g.dt;
    const auto row = path.row(i);
    for (std::size_t j = 0; j < g.ny; ++j) acc += f(s, g.y(j)) * row[j];
  }
  return acc;
}

double trig_basis(std::size_t j, double y, double L) noexcept {
  if (j == 0) return 1.0 / std::sqrt(2.0 * L);
  const double m = static_cast<double>((j + 1) / 2);
  const double arg = m * std::numbers::pi * y / L;
  return (j % 2 == 1 ? std::cos(arg) : std::sin(arg)) / std::sqrt(L);
}

NoisePath SmoothedNoise::as_path() const { return NoisePath(grid, 0, cells); }

SmoothedNoise spectral_project(const NoisePath& path, double epsilon) {
  if (!(epsilon > 0.0)) raise(ErrorKind::InvalidArgument, "epsilon must be positive");
  const double jf = std::floor(1.0 / epsilon);
  if (jf < 1.0) raise(ErrorKind::InvalidArgument, "floor(1/epsilon) must be >= 1");
  const NoiseGrid& g = path.grid();
  SmoothedNoise s;
  s.grid = g;
  s.epsilon = epsilon;
  s.J = static_cast<std::size_t>(jf);
  const std::size_t J = s.J;
  const double dy = g.dy();
  s.basis.resize(J * g.ny);
  for (std::size_t j = 0; j < J; ++j)
    for (std::size_t c = 0; c < g.ny; ++c) s.basis[j * g.ny + c] = trig_basis(j, g.y(c), g.L);
  s.coeffs.assign(g.nt * J, 0.0);
  s.cells.assign(g.nt * g.ny, 0.0);
  for (std::size_t i = 0; i < g.nt; ++i) {
    const auto row = path.row(i);
    for (std::size_t j = 0; j < J; ++j) {
      double acc = 0.0;
      const double* hj = &s.basis[j * g.ny];
      for (std::size_t c = 0; c < g.ny; ++c) acc += hj[c] * row[c];
      s.coeffs[i * J + j] = acc;
    }
    double* out = &s.cells[i * g.ny];
    for (std::size_t j = 0; j < J; ++j) {
      const double wj = s.coeffs[i * J + j] * dy;
      const double* hj = &s.basis[j * g.ny];
      for (std::size_t c = 0; c < g.ny; ++c) out[c] += hj[c] * wj;
    }
  }
  return s;
}

}  // namespace sdsmi
