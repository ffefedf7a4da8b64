// Copyright 2026 The sdsmi Authors
// SPDX-License-Identifier: Apache-2.0

#include "sdsmi/loglaplace.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "sdsmi/error.hpp"
#include "sdsmi/grid_ops.hpp"
#include "sdsmi/simd/kernels.hpp"
#include "solver_core.hpp"

namespace sdsmi {
namespace detail {

std::size_t noise_stride(const NoiseGrid& noise, const SolverGrid& grid) {
  const double r = grid.dt / noise.dt;
  const double k = std::round(r);
  if (!(k >= 1.0) || std::fabs(r - k) > 1e-9 * k) {
    std::ostringstream os;
    os << "solver dt = " << grid.dt << " is not a multiple of noise dt = " << noise.dt;
    raise(ErrorKind::InvalidArgument, os.str());
  }
  return static_cast<std::size_t>(k);
}

std::size_t solver_steps(const NoiseGrid& noise, const SolverGrid& grid, double t) {
  const std::size_t cells = time_index(noise, t);
  const std::size_t stride = noise_stride(noise, grid);
  if (cells % stride != 0) raise(ErrorKind::OffGridTime, "t is not a solver grid time");
  return cells / stride;
}

void check_same_domain(const NoiseGrid& noise, const SolverGrid& grid) {
  if (std::fabs(noise.L - grid.L) > 1e-9 * grid.L)
    raise(ErrorKind::InvalidArgument, "solver and noise grids cover different domains");
  if (grid.nx < 3) raise(ErrorKind::InvalidArgument, "solver grid needs at least 3 nodes");
  if (!(grid.dt > 0.0)) raise(ErrorKind::InvalidArgument, "solver dt must be positive");
}

std::vector<double> transport_matrix(const FunctionSpec& h, const SolverGrid& grid,
                                     const NoiseGrid& noise, int order) {
  std::vector<double> k(grid.nx * noise.ny);
  for (std::size_t i = 0; i < grid.nx; ++i)
    for (std::size_t c = 0; c < noise.ny; ++c)
      k[i * noise.ny + c] = h.eval(noise.y(c) - grid.x(i), order);
  return k;
}

void noise_row(const NoisePath& path, std::size_t stride, std::size_t k, std::vector<double>& out) {
  const std::size_t ny = path.grid().ny;
  out.assign(ny, 0.0);
  for (std::size_t s = 0; s < stride; ++s) {
    const auto row = path.row(k * stride + s);
    for (std::size_t c = 0; c < ny; ++c) out[c] += row[c];
  }
}

std::vector<double> sample_on_grid(const FunctionSpec& f, const SolverGrid& grid) {
  std::vector<double> v(grid.nx);
  for (std::size_t i = 0; i < grid.nx; ++i) v[i] = f.eval(grid.x(i));
  return v;
}

}  // namespace detail

namespace {

using QuadFn = std::function<void(std::span<const double> psi, std::vector<double>& quad)>;

// One step of the log-Laplace equation: explicit Ito transport, diffusion
// by Crank-Nicolson (or explicit), and a predictor-corrector reaction.
class Stepper {
 public:
  Stepper(const Model& model, const SolverGrid& grid, const NoiseGrid& noise)
      : grid_(grid), nx_(grid.nx), ny_(noise.ny), dx_(grid.dx()) {
    detail::check_same_domain(noise, grid);
    b_.resize(nx_);
    hs_.resize(nx_);
    ha_.resize(nx_);
    double amax = 0.0;
    for (std::size_t i = 0; i < nx_; ++i) {
      const double x = grid.x(i);
      b_[i] = model.b().eval(x);
      hs_[i] = 0.5 * model.sigma().eval(x);
      ha_[i] = 0.5 * model.a(x);
      amax = std::max(amax, model.a(x));
    }
    if (grid.scheme == Scheme::Explicit && amax > 0.0 &&
        grid.dt > grid.cfl_safety * dx_ * dx_ / amax) {
      std::ostringstream os;
      os << "explicit scheme needs dt <= " << grid.cfl_safety * dx_ * dx_ / amax << ", got "
         << grid.dt;
      raise(ErrorKind::CFLViolation, os.str());
    }
    has_noise_ = !model.h().is_zero();
    if (has_noise_) {
      k_ = detail::transport_matrix(model.h(), grid, noise, 0);
      double worst = 0.0;
      for (std::size_t i = 0; i < nx_; ++i) {
        double s = 0.0;
        for (std::size_t c = 0; c < ny_; ++c) s += k_[i * ny_ + c] * k_[i * ny_ + c];
        worst = std::max(worst, s * noise.dy());
      }
      noise_cfl_ = grid.dt * worst / (dx_ * dx_);
      if (noise_cfl_ > grid.noise_cfl_safety) {
        std::ostringstream os;
        os << "noise CFL dt*max sum h^2 dy / dx^2 = " << noise_cfl_ << " exceeds "
           << grid.noise_cfl_safety;
        raise(ErrorKind::CFLViolation, os.str());
      }
    }
    g_.assign(nx_, 0.0);
    stage_.resize(nx_);
    quad_.resize(nx_);
    mid_.resize(nx_);
    kappa_.resize(nx_);
    zeros_.assign(nx_, 0.0);
    diag_.resize(nx_);
    if (grid.scheme == Scheme::SemiImplicit) {
      lower_.resize(nx_);
      upper_.resize(nx_);
      diag0_.resize(nx_);
      const double c = 0.5 * grid.dt / (dx_ * dx_);
      for (std::size_t i = 0; i < nx_; ++i) {
        const double r = c * ha_[i];
        diag0_[i] = 1.0 + 2.0 * r;
        lower_[i] = -r;
        upper_[i] = -r;
      }
      upper_[0] *= 2.0;
      lower_[nx_ - 1] *= 2.0;
    }
  }

  double noise_cfl() const noexcept { return noise_cfl_; }

  // Predictor: explicit reaction. Corrector: reaction linearized about the
  // predictor midpoint and split evenly between the explicit stage and the
  // implicit diagonal. Transport stays explicit in both passes.
  void step(std::vector<double>& psi, std::span<const double> noise, const QuadFn& quad_fn) {
    if (has_noise_) simd::matvec(k_, nx_, ny_, noise, g_);
    quad_fn(psi, quad_);
    stage(psi, b_, hs_, quad_, zeros_);
    for (std::size_t i = 0; i < nx_; ++i) mid_[i] = 0.5 * (psi[i] + stage_[i]);
    quad_fn(mid_, quad_);
    for (std::size_t i = 0; i < nx_; ++i) kappa_[i] = 0.5 * (b_[i] + hs_[i] * quad_[i]);
    stage(psi, kappa_, zeros_, quad_, kappa_);
    psi.swap(stage_);
  }

 private:
  void stage(std::span<const double> psi, std::span<const double> b,
             std::span<const double> hs, std::span<const double> quad,
             std::span<const double> implicit_rate) {
    simd::ExplicitStage s;
    s.psi = psi;
    s.b = b;
    s.half_sigma = hs;
    s.quad = quad;
    s.g = g_;
    s.half_a = ha_;
    s.dt = grid_.dt;
    s.inv_two_dx = 0.5 / dx_;
    s.inv_dx2 = 1.0 / (dx_ * dx_);
    s.diff_weight = grid_.scheme == Scheme::SemiImplicit ? 0.5 : 1.0;
    s.out = stage_;
    simd::explicit_stage(s);
    if (grid_.scheme == Scheme::SemiImplicit) {
      for (std::size_t i = 0; i < nx_; ++i) diag_[i] = diag0_[i] + grid_.dt * implicit_rate[i];
      solve_tridiagonal(lower_, diag_, upper_, stage_);
    } else {
      for (std::size_t i = 0; i < nx_; ++i) stage_[i] /= 1.0 + grid_.dt * implicit_rate[i];
    }
  }

  SolverGrid grid_;
  std::size_t nx_, ny_;
  double dx_;
  bool has_noise_ = false;
  double noise_cfl_ = 0.0;
  std::vector<double> b_, hs_, ha_, k_, g_, stage_;
  std::vector<double> lower_, upper_, diag0_, diag_;
  std::vector<double> quad_, mid_, kappa_, zeros_;
};

double max_of(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, x);
  return m;
}

// Runs the stepper from psi0 for t, recording snapshots.
FieldPath run(const Model& model, std::vector<double> psi, const NoisePath& feed,
              const SolverGrid& grid, double t, const SolveOptions& opts, const QuadFn& quad_fn,
              double phi_max) {
  const NoiseGrid& ng = feed.grid();
  const std::size_t nsteps = detail::solver_steps(ng, grid, t);
  const std::size_t stride = detail::noise_stride(ng, grid);
  Stepper stepper(model, grid, ng);
  const std::size_t rs = std::max<std::size_t>(1, opts.record_stride);

  FieldPath out;
  out.grid = grid;
  out.noise_cfl = stepper.noise_cfl();
  auto record = [&](std::size_t k) {
    out.times.push_back(static_cast<double>(k) * grid.dt);
    out.values.insert(out.values.end(), psi.begin(), psi.end());
  };
  record(0);
  std::vector<double> row;
  const double limit = 10.0 * phi_max;
  for (std::size_t k = 0; k < nsteps; ++k) {
    detail::noise_row(feed, stride, k, row);
    stepper.step(psi, row, quad_fn);
    double amax = 0.0;
    for (double& v : psi) {
      if (!std::isfinite(v)) amax = HUGE_VAL;
      if (v < out.min_raw) out.min_raw = v;
      if (v < -1e-8) {
        v = 0.0;
        ++out.clip_count;
      }
      amax = std::max(amax, std::fabs(v));
    }
    if (amax > limit) {
      std::ostringstream os;
      os << "max |psi| = " << amax << " exceeds 10 max phi = " << limit << " at t = "
         << static_cast<double>(k + 1) * grid.dt;
      raise(ErrorKind::BlowUp, os.str());
    }
    if ((k + 1) % rs == 0 || k + 1 == nsteps) record(k + 1);
  }
  return out;
}

std::vector<double> checked_phi(const FunctionSpec& phi, const SolverGrid& grid) {
  auto v = detail::sample_on_grid(phi, grid);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] < 0.0 || !std::isfinite(v[i])) {
      std::ostringstream os;
      os << "phi(" << grid.x(i) << ") = " << v[i] << " is negative";
      raise(ErrorKind::NegativePhiInput, os.str());
    }
  }
  return v;
}

void plain_quad(std::span<const double> psi, std::vector<double>& quad) {
  std::copy(psi.begin(), psi.end(), quad.begin());
}

double trapezoid_time(const std::vector<double>& ts, const std::vector<double>& fs) {
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < ts.size(); ++k)
    acc += 0.5 * (ts[k + 1] - ts[k]) * (fs[k] + fs[k + 1]);
  return acc;
}

}  // namespace

std::span<const double> FieldPath::at_time(double t) const {
  for (std::size_t k = 0; k < times.size(); ++k)
    if (std::fabs(times[k] - t) <= 1e-9 * std::max(1.0, std::fabs(t))) return at(k);
  std::ostringstream os;
  os << "no snapshot stored at t = " << t;
  raise(ErrorKind::OffGridTime, os.str());
}

double FieldPath::max_value(std::size_t k) const { return max_of(at(k)); }

FieldPath solve_forward(const Model& model, const FunctionSpec& phi, const NoisePath& path,
                        const SolverGrid& grid, double t, const SolveOptions& opts) {
  auto psi = checked_phi(phi, grid);
  const double pmax = max_of(psi);
  return run(model, std::move(psi), path, grid, t, opts, plain_quad, pmax);
}

FieldPath solve_backward(const Model& model, const FunctionSpec& phi, double r, double t,
                         const NoisePath& path, const SolverGrid& grid, const SolveOptions& opts) {
  if (!(r >= 0.0) || r > t) raise(ErrorKind::InvalidArgument, "solve_backward needs 0 <= r <= t");
  // Forward in u = t - s on the time-reversed increments. reverse_path
  // negates; the transport term needs the un-negated reversal, so negate back.
  const NoisePath feed = negate_path(reverse_path(path, t));
  auto psi = checked_phi(phi, grid);
  const double pmax = max_of(psi);
  FieldPath fwd = run(model, std::move(psi), feed, grid, t - r, opts, plain_quad, pmax);
  FieldPath out;
  out.grid = grid;
  out.direction = FieldPath::Direction::Backward;
  out.t_ref = t;
  out.clip_count = fwd.clip_count;
  out.min_raw = fwd.min_raw;
  out.noise_cfl = fwd.noise_cfl;
  const std::size_t n = fwd.size();
  out.times.resize(n);
  out.values.resize(fwd.values.size());
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t src = n - 1 - k;
    out.times[k] = t - fwd.times[src];
    const auto v = fwd.at(src);
    std::copy(v.begin(), v.end(), out.values.begin() + static_cast<std::ptrdiff_t>(k * grid.nx));
  }
  out.times.front() = r;
  out.times.back() = t;
  return out;
}

ClfResult clf_detail(const Model& model, const Measure& mu, const Measure& m,
                     const FunctionSpec& phi, const NoisePath& path, double t,
                     const SolverGrid& grid) {
  ClfResult res;
  const FieldPath bw = solve_backward(model, phi, 0.0, t, path, grid);
  const double dx = grid.dx();
  res.mu_term = mu.pair_grid(-grid.L, dx, bw.at(0));
  if (!m.empty()) {
    std::vector<double> f(bw.size());
    for (std::size_t k = 0; k < bw.size(); ++k) f[k] = m.pair_grid(-grid.L, dx, bw.at(k));
    res.m_term = trapezoid_time(bw.times, f);
  }
  res.value = std::exp(-res.mu_term - res.m_term);
  res.clip_count = bw.clip_count;
  return res;
}

double clf(const Model& model, const Measure& mu, const Measure& m, const FunctionSpec& phi,
           const NoisePath& path, double t, const SolverGrid& grid) {
  return clf_detail(model, mu, m, phi, path, t, grid).value;
}

double forward_immigration_functional(const Model& model, const Measure& m,
                                      const FunctionSpec& phi, const NoisePath& path, double t,
                                      const SolverGrid& grid) {
  const FieldPath fw = solve_forward(model, phi, path, grid, t);
  std::vector<double> f(fw.size());
  for (std::size_t k = 0; k < fw.size(); ++k) f[k] = m.pair_grid(-grid.L, grid.dx(), fw.at(k));
  return std::exp(-trapezoid_time(fw.times, f));
}

double d_eps(std::span<const double> tf, double dx, double epsilon) {
  const double nrm = l2_norm(tf, dx);
  if (!(nrm > 0.0)) return 1.0;
  return std::min(nrm, 1.0 / epsilon) / nrm;
}

FieldPath solve_smoothed(const Model& model, const FunctionSpec& phi, double epsilon,
                         const NoisePath& path, const SolverGrid& grid, double t,
                         const SolveOptions& opts) {
  if (!(epsilon > 0.0)) raise(ErrorKind::InvalidArgument, "epsilon must be positive");
  const auto raw = checked_phi(phi, grid);
  const auto T = heat_matrix(grid.nx, grid.dx(), epsilon);
  auto psi = apply_matrix(T, raw);
  const SmoothedNoise sn = spectral_project(path, epsilon);
  const NoisePath feed = sn.as_path();
  const double dx = grid.dx();
  std::vector<double> tpsi(grid.nx);
  QuadFn quad = [&](std::span<const double> p, std::vector<double>& q) {
    simd::matvec(T, grid.nx, grid.nx, p, tpsi);
    const double d = d_eps(tpsi, dx, epsilon);
    for (std::size_t i = 0; i < grid.nx; ++i) q[i] = d * tpsi[i];
  };
  return run(model, std::move(psi), feed, grid, t, opts, quad, max_of(raw));
}

double field_mass(std::span<const double> v, double dx) {
  const std::size_t n = v.size();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += ((i == 0 || i + 1 == n) ? 0.5 : 1.0) * v[i];
  return s * dx;
}

FieldPath solve_linear_density(const Model& model, const Measure& v0, const NoisePath& path,
                               const SolverGrid& grid, double t, const SolveOptions& opts) {
  if (v0.rep() != Measure::Rep::Density && !v0.empty())
    raise(ErrorKind::InvalidArgument, "linear density solver needs a density initial measure");
  const NoiseGrid& ng = path.grid();
  detail::check_same_domain(ng, grid);
  const std::size_t nsteps = detail::solver_steps(ng, grid, t);
  const std::size_t stride = detail::noise_stride(ng, grid);
  const std::size_t nx = grid.nx;
  const double dx = grid.dx();
  const double dt = grid.dt;

  std::vector<double> v(nx, 0.0);
  if (!v0.empty())
    for (std::size_t i = 0; i < nx; ++i)
      v[i] = interp_linear(v0.x0(), v0.dx(), v0.values(), grid.x(i)) *
             ((grid.x(i) < v0.x0() - 1e-12 ||
               grid.x(i) > v0.x0() + v0.dx() * static_cast<double>(v0.values().size() - 1) + 1e-12)
                  ? 0.0
                  : 1.0);

  std::vector<double> a(nx), decay(nx), w(nx);
  double amax = 0.0;
  for (std::size_t i = 0; i < nx; ++i) {
    a[i] = model.a(grid.x(i));
    amax = std::max(amax, a[i]);
    decay[i] = std::exp(-model.b().eval(grid.x(i)) * dt);
    w[i] = (i == 0 || i + 1 == nx) ? 0.5 : 1.0;
  }
  const bool implicit = grid.scheme == Scheme::SemiImplicit;
  if (!implicit && amax > 0.0 && dt > grid.cfl_safety * dx * dx / amax)
    raise(ErrorKind::CFLViolation, "explicit density scheme violates dt <= safety dx^2 / max a");
  const bool has_noise = !model.h().is_zero();
  std::vector<double> K;
  FieldPath out;
  out.grid = grid;
  if (has_noise) {
    K = detail::transport_matrix(model.h(), grid, ng, 0);
    double worst = 0.0;
    for (std::size_t i = 0; i < nx; ++i) {
      double s = 0.0;
      for (std::size_t c = 0; c < ng.ny; ++c) s += K[i * ng.ny + c] * K[i * ng.ny + c];
      worst = std::max(worst, s * ng.dy());
    }
    out.noise_cfl = dt * worst / (dx * dx);
    if (out.noise_cfl > grid.noise_cfl_safety)
      raise(ErrorKind::CFLViolation, "noise CFL exceeded in the density solver");
  }
  // Weighted implicit system for theta-weighted diffusion of (a v)''/2.
  const double theta = implicit ? 0.5 : 0.0;
  const double ex = 1.0 - theta;
  std::vector<double> lower(nx, 0.0), upper(nx, 0.0), diag0(nx, 1.0), diag(nx);
  const double c = 0.5 * dt / (dx * dx);
  for (std::size_t i = 0; i < nx; ++i) {
    const double inv_w = 1.0 / w[i];
    const double faces = (i == 0 || i + 1 == nx) ? 1.0 : 2.0;
    diag0[i] = 1.0 + theta * c * a[i] * faces * inv_w;
    if (i > 0) lower[i] = -theta * c * a[i - 1] * inv_w;
    if (i + 1 < nx) upper[i] = -theta * c * a[i + 1] * inv_w;
  }

  const std::size_t rs = std::max<std::size_t>(1, opts.record_stride);
  auto record = [&](std::size_t k) {
    out.times.push_back(static_cast<double>(k) * dt);
    out.values.insert(out.values.end(), v.begin(), v.end());
  };
  record(0);
  std::vector<double> row, g(nx, 0.0), rhs(nx), flux(nx + 1);
  for (std::size_t k = 0; k < nsteps; ++k) {
    if (has_noise) {
      detail::noise_row(path, stride, k, row);
      simd::matvec(K, nx, ng.ny, row, g);
    }
    // Face fluxes: explicit part of the diffusion plus the stochastic flux.
    flux[0] = 0.0;
    flux[nx] = 0.0;
    for (std::size_t i = 0; i + 1 < nx; ++i) {
      const double diff = 0.5 * (a[i + 1] * v[i + 1] - a[i] * v[i]) / dx * dt * ex;
      const double noise = has_noise ? 0.5 * (g[i] * v[i] + g[i + 1] * v[i + 1]) : 0.0;
      flux[i + 1] = diff - noise;
    }
    for (std::size_t i = 0; i < nx; ++i) rhs[i] = v[i] + (flux[i + 1] - flux[i]) / (w[i] * dx);
    if (implicit) {
      diag = diag0;
      solve_tridiagonal(lower, diag, upper, rhs);
    }
    for (std::size_t i = 0; i < nx; ++i) {
      double x = rhs[i] * decay[i];
      if (x < out.min_raw) out.min_raw = x;
      if (x < -1e-8) {
        x = 0.0;
        ++out.clip_count;
      }
      v[i] = x;
    }
    if ((k + 1) % rs == 0 || k + 1 == nsteps) record(k + 1);
  }
  return out;
}

}  // namespace sdsmi
