// Copyright 2026 The sdsmi Authors
// SPDX-License-Identifier: Apache-2.0

#include "sdsmi/measure.hpp"

#include <algorithm>
#include <cmath>

#include "sdsmi/error.hpp"

namespace sdsmi {

double interp_linear(double x0, double dx, std::span<const double> g, double x) noexcept {
  const std::size_t n = g.size();
  if (n == 0) return 0.0;
  const double pos = (x - x0) / dx;
  if (!(pos > 0.0)) return g.front();
  if (pos >= static_cast<double>(n - 1)) return g.back();
  const std::size_t i = static_cast<std::size_t>(pos);
  const double f = pos - static_cast<double>(i);
  return (1.0 - f) * g[i] + f * g[i + 1];
}

Measure Measure::zero() { return Measure{}; }

Measure Measure::dirac(double x, double weight) { return atomic({Atom{x, weight}}); }

Measure Measure::atomic(std::vector<Atom> atoms) {
  Measure m;
  m.rep_ = Rep::Atomic;
  m.atom_cdf_.reserve(atoms.size());
  double acc = 0.0;
  for (const Atom& a : atoms) {
    if (!std::isfinite(a.x)) raise(ErrorKind::InvalidArgument, "atom position must be finite");
    if (!(a.w >= 0.0) || !std::isfinite(a.w))
      raise(ErrorKind::InvalidArgument, "atom weight must be finite and >= 0");
    acc += a.w;
    m.atom_cdf_.push_back(acc);
  }
  m.atoms_ = std::move(atoms);
  m.mass_ = acc;
  return m;
}

Measure Measure::density(double x0, double dx, std::vector<double> values) {
  if (!(dx > 0.0)) raise(ErrorKind::InvalidArgument, "density grid step must be positive");
  if (values.size() < 2) raise(ErrorKind::InvalidArgument, "density needs at least two nodes");
  for (double v : values)
    if (!(v >= 0.0) || !std::isfinite(v))
      raise(ErrorKind::InvalidArgument, "density values must be finite and >= 0");
  Measure m;
  m.rep_ = Rep::Density;
  m.x0_ = x0;
  m.dx_ = dx;
  m.cell_cdf_.resize(values.size() - 1);
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    acc += 0.5 * dx * (values[i] + values[i + 1]);
    m.cell_cdf_[i] = acc;
  }
  m.values_ = std::move(values);
  m.mass_ = acc;
  return m;
}

Measure Measure::uniform(double lo, double hi, double mass, double L, double dx) {
  if (!(hi > lo)) raise(ErrorKind::InvalidArgument, "uniform needs lo < hi");
  if (!(mass >= 0.0)) raise(ErrorKind::InvalidArgument, "uniform mass must be >= 0");
  if (lo < -L || hi > L) raise(ErrorKind::InvalidArgument, "uniform support must lie in [-L, L]");
  const auto n = static_cast<std::size_t>(std::llround(2.0 * L / dx)) + 1;
  const auto ilo = static_cast<std::size_t>(std::llround((lo + L) / dx));
  const auto ihi = static_cast<std::size_t>(std::llround((hi + L) / dx));
  if (ihi <= ilo) raise(ErrorKind::InvalidArgument, "uniform support narrower than one cell");
  const double d = mass / (static_cast<double>(ihi - ilo) * dx);
  std::vector<double> v(n, 0.0);
  for (std::size_t i = ilo; i <= ihi; ++i) v[i] = d;
  v[ilo] = 0.5 * d;
  v[ihi] = 0.5 * d;
  return density(-L, dx, std::move(v));
}

double Measure::pair(const FunctionSpec& f) const {
  double acc = 0.0;
  if (rep_ == Rep::Atomic) {
    for (const Atom& a : atoms_) acc += a.w * f.eval(a.x);
    return acc;
  }
  const std::size_t n = values_.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double w = (i == 0 || i + 1 == n) ? 0.5 : 1.0;
    acc += w * values_[i] * f.eval(x0_ + static_cast<double>(i) * dx_);
  }
  return acc * dx_;
}

double Measure::pair_grid(double gx0, double gdx, std::span<const double> g) const {
  double acc = 0.0;
  if (rep_ == Rep::Atomic) {
    for (const Atom& a : atoms_) acc += a.w * interp_linear(gx0, gdx, g, a.x);
    return acc;
  }
  const std::size_t n = values_.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (values_[i] == 0.0) continue;
    const double w = (i == 0 || i + 1 == n) ? 0.5 : 1.0;
    acc += w * values_[i] * interp_linear(gx0, gdx, g, x0_ + static_cast<double>(i) * dx_);
  }
  return acc * dx_;
}

double Measure::sample(double u) const {
  if (!(mass_ > 0.0)) raise(ErrorKind::InvalidArgument, "cannot sample from a zero measure");
  const double target = u * mass_;
  if (rep_ == Rep::Atomic) {
    auto it = std::upper_bound(atom_cdf_.begin(), atom_cdf_.end(), target);
    if (it == atom_cdf_.end()) --it;
    return atoms_[static_cast<std::size_t>(it - atom_cdf_.begin())].x;
  }
  auto it = std::upper_bound(cell_cdf_.begin(), cell_cdf_.end(), target);
  if (it == cell_cdf_.end()) --it;
  const std::size_t i = static_cast<std::size_t>(it - cell_cdf_.begin());
  // Skip empty cells that upper_bound may land on at a flat stretch.
  const double before = i == 0 ? 0.0 : cell_cdf_[i - 1];
  const double r = std::max(0.0, target - before) / dx_;
  const double v0 = values_[i];
  const double v1 = values_[i + 1];
  // Solve v0 f + (v1 - v0) f^2 / 2 = r for f in [0, 1].
  const double alpha = 0.5 * (v1 - v0);
  double f;
  if (v0 + v1 == 0.0) {
    f = 0.5;
  } else {
    const double disc = std::max(0.0, v0 * v0 + 4.0 * alpha * r);
    const double den = v0 + std::sqrt(disc);
    f = den > 0.0 ? 2.0 * r / den : 0.5;
  }
  f = std::clamp(f, 0.0, 1.0);
  return x0_ + (static_cast<double>(i) + f) * dx_;
}

}  // namespace sdsmi
