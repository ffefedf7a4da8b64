// Copyright 2026 The sdsmi Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sdsmi/error.hpp"
#include "sdsmi/grid_ops.hpp"
#include "sdsmi/loglaplace.hpp"
#include "sdsmi/rng.hpp"
#include "sdsmi/simd/kernels.hpp"
#include "solver_core.hpp"

namespace sdsmi {

double default_bandwidth(std::size_t n, double L) noexcept {
  return std::pow(static_cast<double>(n), -0.2) * 2.0 * L / 4.0;
}

FieldPath weighted_particle_solve(const Model& model, const FunctionSpec& phi, double epsilon,
                                  const NoisePath& path, std::size_t n, std::uint64_t seed,
                                  double t, const WeightedOptions& opts) {
  if (!(epsilon > 0.0)) raise(ErrorKind::InvalidArgument, "epsilon must be positive");
  if (n < 1000) raise(ErrorKind::InvalidArgument, "weighted particle solve needs n >= 1000");
  const SolverGrid& grid = opts.grid;
  const NoiseGrid& ng = path.grid();
  detail::check_same_domain(ng, grid);
  const std::size_t nsteps = detail::solver_steps(ng, grid, t);
  const std::size_t stride = detail::noise_stride(ng, grid);
  const std::size_t nx = grid.nx;
  const std::size_t ny = ng.ny;
  const double dx = grid.dx();
  const double dt = grid.dt;
  const double L = grid.L;
  const double x0 = -L;
  const double bw = opts.bandwidth > 0.0 ? opts.bandwidth : default_bandwidth(n, L);

  std::vector<double> phiv(nx);
  for (std::size_t i = 0; i < nx; ++i) {
    phiv[i] = phi.eval(grid.x(i));
    if (phiv[i] < 0.0) raise(ErrorKind::NegativePhiInput, "phi must be nonnegative");
  }
  const auto T = heat_matrix(nx, dx, epsilon);
  const auto S = kde_matrix(nx, dx, bw);
  const auto tphi = apply_matrix(T, phiv);
  const double mass0 = field_mass(tphi, dx);

  std::vector<char> record(nsteps + 1, 0);
  for (double tr : opts.record_times) {
    const std::size_t k = detail::solver_steps(ng, grid, tr);
    if (k > nsteps) raise(ErrorKind::OffGridTime, "record time beyond horizon");
    record[k] = 1;
  }
  record[nsteps] = 1;

  FieldPath out;
  out.grid = grid;
  if (!(mass0 > 0.0)) {
    for (std::size_t k = 0; k <= nsteps; ++k) {
      if (!record[k]) continue;
      out.times.push_back(static_cast<double>(k) * dt);
      out.values.insert(out.values.end(), nx, 0.0);
    }
    return out;
  }

  // Initial cloud: stratified positions from T phi, equal weights.
  const Measure init = Measure::density(x0, dx, tphi);
  std::vector<double> xi(n), m(n, mass0);
  {
    Stream s(seed, StreamTag::Weighted, ~0ULL);
    for (std::size_t i = 0; i < n; ++i)
      xi[i] = init.sample((static_cast<double>(i) + s.uniform()) / static_cast<double>(n));
  }

  // Noise fields on the solver nodes, interpolated at particle positions.
  const SmoothedNoise sn = spectral_project(path, epsilon);
  const NoisePath feed = sn.as_path();
  const bool has_noise = !model.h().is_zero();
  std::vector<double> K0, K1, Q(nx, 0.0);
  if (has_noise) {
    K0 = detail::transport_matrix(model.h(), grid, ng, 0);
    K1 = detail::transport_matrix(model.h(), grid, ng, 1);
    // Q(x) = sum_j H_j(x)^2, H_j(x) = sum_c h'(y_c - x) h_j(y_c) dy: the
    // quadratic variation rate of the weight noise.
    const double dy = ng.dy();
    for (std::size_t i = 0; i < nx; ++i) {
      double q = 0.0;
      for (std::size_t j = 0; j < sn.J; ++j) {
        double hj = 0.0;
        for (std::size_t c = 0; c < ny; ++c) hj += K1[i * ny + c] * sn.basis[j * ny + c];
        hj *= dy;
        q += hj * hj;
      }
      Q[i] = q;
    }
  }

  auto snapshot = [&](std::size_t k) {
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = m[i] / static_cast<double>(n);
    const auto dens = cic_density(xi, w, x0, dx, nx);
    const auto smooth = apply_matrix(S, dens);
    out.times.push_back(static_cast<double>(k) * dt);
    out.values.insert(out.values.end(), smooth.begin(), smooth.end());
  };
  if (record[0]) snapshot(0);

  const double sqdt = std::sqrt(dt);
  std::vector<double> row, D(nx, 0.0), E(nx, 0.0), wn(n);
  const FunctionSpec& c = model.c();
  const bool move_bm = !c.is_zero();
  for (std::size_t k = 0; k < nsteps; ++k) {
    if (has_noise) {
      detail::noise_row(feed, stride, k, row);
      simd::matvec(K0, nx, ny, row, D);
      simd::matvec(K1, nx, ny, row, E);
    }
    // Feedback field T psi from the binned weighted empirical measure.
    for (std::size_t i = 0; i < n; ++i) wn[i] = m[i] / static_cast<double>(n);
    const auto dens = cic_density(xi, wn, x0, dx, nx);
    const auto tpsi = apply_matrix(T, dens);
    const double d = d_eps(tpsi, dx, epsilon);

    double msum = 0.0, mmax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = xi[i];
      const double drift = 0.5 * model.a(x, 2) - model.b().eval(x) -
                           0.5 * model.sigma().eval(x) * d * interp_linear(x0, dx, tpsi, x);
      double logw = drift * dt;
      if (has_noise) {
        // -d/dx h(y - x) = h'(y - x), so the default sign is +.
        logw += opts.weight_noise_sign * interp_linear(x0, dx, E, x) - 0.5 * interp_linear(x0, dx, Q, x) * dt;
      }
      m[i] *= std::exp(logw);
      double step = 0.0;
      if (move_bm) {
        Stream s(seed, StreamTag::Weighted, i, k);
        const double cx = c.eval(x);
        step += cx * sqdt * s.normal() + 2.0 * cx * c.eval(x, 1) * dt;
      }
      if (has_noise) step -= interp_linear(x0, dx, D, x);
      double nxp = x + step;
      if (nxp > L || nxp < -L) nxp = std::clamp(nxp > L ? 2.0 * L - nxp : -2.0 * L - nxp, -L, L);
      xi[i] = nxp;
      msum += m[i];
      mmax = std::max(mmax, m[i]);
    }
    const double mmean = msum / static_cast<double>(n);
    if (mmean > 0.0 && mmax / mmean > opts.max_weight_ratio) {
      std::ostringstream os;
      os << "max weight / mean weight = " << mmax / mmean << " exceeds "
         << opts.max_weight_ratio << " at t = " << static_cast<double>(k + 1) * dt;
      raise(ErrorKind::DegenerateWeights, os.str());
    }
    if (record[k + 1]) snapshot(k + 1);
  }
  return out;
}

}  // namespace sdsmi
