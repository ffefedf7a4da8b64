// Copyright 2026 The sdsmi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sdsmi/model.hpp"

namespace sdsmi {

struct Atom {
  double x = 0.0;
  double w = 0.0;
};

/// Finite measure on the line, either a list of weighted atoms or a
/// nonnegative density sampled on a uniform grid (trapezoid mass,
/// piecewise-linear in between).
class Measure {
 public:
  enum class Rep { Atomic, Density };

  Measure() = default;

  static Measure zero();
  static Measure dirac(double x, double weight = 1.0);
  static Measure atomic(std::vector<Atom> atoms);
  static Measure density(double x0, double dx, std::vector<double> values);
  /// mass times the uniform law on [lo, hi], as a density on nodes
  /// x0 + i*dx spanning [-L, L]. lo and hi are snapped to nodes; end nodes
  /// carry half height so the trapezoid mass is exactly `mass`.
  static Measure uniform(double lo, double hi, double mass, double L, double dx);

  Rep rep() const noexcept { return rep_; }
  double total_mass() const noexcept { return mass_; }
  bool empty() const noexcept { return mass_ == 0.0; }

  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  double x0() const noexcept { return x0_; }
  double dx() const noexcept { return dx_; }
  const std::vector<double>& values() const noexcept { return values_; }

  /// <f, measure>
  double pair(const FunctionSpec& f) const;
  /// <g, measure> where g is sampled on nodes gx0 + i*gdx and linearly
  /// interpolated (held constant outside its grid).
  double pair_grid(double gx0, double gdx, std::span<const double> g) const;

  /// Draws a point from measure / mass by inverse CDF of u in (0,1).
  double sample(double u) const;

 private:
  Rep rep_ = Rep::Atomic;
  double mass_ = 0.0;
  std::vector<Atom> atoms_;
  std::vector<double> atom_cdf_;
  double x0_ = 0.0;
  double dx_ = 1.0;
  std::vector<double> values_;
  std::vector<double> cell_cdf_;  // cumulative cell masses, size values-1
};

/// Linear interpolation of nodes x0 + i*dx, constant beyond the ends.
double interp_linear(double x0, double dx, std::span<const double> g, double x) noexcept;

}  // namespace sdsmi
