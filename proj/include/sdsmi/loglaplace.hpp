// Copyright 2026 The sdsmi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sdsmi/measure.hpp"
#include "sdsmi/model.hpp"
#include "sdsmi/noise.hpp"

namespace sdsmi {

enum class Scheme { SemiImplicit, Explicit };

/// Nodes x_i = -L + i dx, i < nx. dt must be an integer multiple of the
/// noise time step.
struct SolverGrid {
  double L = 8.0;
  std::size_t nx = 201;
  double dt = 1e-3;
  Scheme scheme = Scheme::SemiImplicit;
  double cfl_safety = 0.45;
  double noise_cfl_safety = 0.5;

  double dx() const noexcept { return 2.0 * L / static_cast<double>(nx - 1); }
  double x(std::size_t i) const noexcept { return -L + static_cast<double>(i) * dx(); }
};

/// Snapshots of a grid field. For backward fields, times are the s of
/// psi_{s,t} in ascending order and t_ref is t.
struct FieldPath {
  enum class Direction : std::uint16_t { Forward = 0, Backward = 1 };

  SolverGrid grid;
  Direction direction = Direction::Forward;
  double t_ref = 0.0;
  std::vector<double> times;
  std::vector<double> values;  // times.size() x nx

  // Diagnostics.
  std::uint64_t clip_count = 0;
  double min_raw = 0.0;        // most negative value seen before clipping
  double noise_cfl = 0.0;      // dt * max_x sum_j h(y_j - x)^2 dy / dx^2

  std::size_t size() const noexcept { return times.size(); }
  std::span<const double> at(std::size_t k) const noexcept {
    return {values.data() + k * grid.nx, grid.nx};
  }
  std::span<double> at(std::size_t k) noexcept { return {values.data() + k * grid.nx, grid.nx}; }
  /// Snapshot at time t (must be stored).
  std::span<const double> at_time(double t) const;
  const std::span<const double> back() const noexcept { return at(size() - 1); }
  double max_value(std::size_t k) const;
};

struct SolveOptions {
  /// Keep every k-th step (the first and last are always kept).
  std::size_t record_stride = 1;
};

/// psi_t of the nonlinear log-Laplace SPDE with psi_0 = phi.
FieldPath solve_forward(const Model& model, const FunctionSpec& phi, const NoisePath& path,
                        const SolverGrid& grid, double t, const SolveOptions& opts = {});

/// psi_{s,t} for s in [r, t] via the forward solver on the time-reversed
/// noise. psi_{t,t} = phi.
FieldPath solve_backward(const Model& model, const FunctionSpec& phi, double r, double t,
                         const NoisePath& path, const SolverGrid& grid,
                         const SolveOptions& opts = {});

struct ClfResult {
  double value = 1.0;
  double mu_term = 0.0;  // <psi_{0,t}, mu>
  double m_term = 0.0;   // int_0^t <psi_{s,t}, m> ds
  std::uint64_t clip_count = 0;
};

/// exp(-<psi_{0,t}, mu> - int_0^t <psi_{s,t}, m> ds).
ClfResult clf_detail(const Model& model, const Measure& mu, const Measure& m,
                     const FunctionSpec& phi, const NoisePath& path, double t,
                     const SolverGrid& grid);
double clf(const Model& model, const Measure& mu, const Measure& m, const FunctionSpec& phi,
           const NoisePath& path, double t, const SolverGrid& grid);

/// Forward-solver analogue used for the stationary limit:
/// exp(-int_0^t <psi_s, m> ds), psi from solve_forward with phi.
double forward_immigration_functional(const Model& model, const Measure& m,
                                      const FunctionSpec& phi, const NoisePath& path, double t,
                                      const SolverGrid& grid);

/// Smoothed equation: T_eps phi initial data, truncated quadratic term, and
/// spectrally projected noise.
FieldPath solve_smoothed(const Model& model, const FunctionSpec& phi, double epsilon,
                         const NoisePath& path, const SolverGrid& grid, double t,
                         const SolveOptions& opts = {});

/// d_eps(f) = min(|T f|, 1/eps) / |T f| in the grid L2 norm (1 if T f = 0).
double d_eps(std::span<const double> tf, double dx, double epsilon);

struct WeightedOptions {
  SolverGrid grid;            // fields, feedback and output live here
  double bandwidth = 0.0;     // <= 0 means n^{-1/5} * 2L / 4
  double max_weight_ratio = 1e4;
  std::vector<double> record_times;  // the horizon is always recorded
  /// Sign of the h' weight-noise term relative to d/dx h(y - x). +1 makes
  /// the weighted empirical measure solve the smoothed equation; -1 reads
  /// h' as the derivative of h at y - x. Kept for the bias diagnostic.
  double weight_noise_sign = 1.0;
};

/// Weighted interacting particles for the smoothed equation; the output
/// fields are kernel density reconstructions on the solver grid.
FieldPath weighted_particle_solve(const Model& model, const FunctionSpec& phi, double epsilon,
                                  const NoisePath& path, std::size_t n, std::uint64_t seed,
                                  double t, const WeightedOptions& opts);

double default_bandwidth(std::size_t n, double L) noexcept;

/// Density SPDE of the linear case in conservative form.
FieldPath solve_linear_density(const Model& model, const Measure& v0, const NoisePath& path,
                               const SolverGrid& grid, double t, const SolveOptions& opts = {});

/// Trapezoid mass of a snapshot.
double field_mass(std::span<const double> v, double dx);

/// CSV (t followed by values, one row per time level) and binary export.
void write_field_csv(const FieldPath& f, const std::string& file);
void write_field_bin(const FieldPath& f, const std::string& file);
FieldPath read_field_bin(const std::string& file);

}  // namespace sdsmi
