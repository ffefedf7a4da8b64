// Copyright 2026 The sdsmi Authors
// SPDX-License-Identifier: Apache-2.0

#include "sdsmi/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "sdsmi/error.hpp"
#include "sdsmi/simd/kernels.hpp"

namespace sdsmi {
namespace {

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) raise(ErrorKind::InvalidArgument, std::string(what) + " must be finite");
}

// Second derivatives of the clamped (zero end slope) cubic spline.
std::vector<double> clamped_spline(const std::vector<double>& y, double h) {
  const std::size_t n = y.size();
  std::vector<double> m(n, 0.0);
  if (n < 2) return m;
  std::vector<double> diag(n, 4.0), rhs(n), lower(n, 1.0), upper(n, 1.0);
  diag[0] = 2.0;
  diag[n - 1] = 2.0;
  const double s = 6.0 / (h * h);
  rhs[0] = s * (y[1] - y[0]);
  rhs[n - 1] = -s * (y[n - 1] - y[n - 2]);
  for (std::size_t i = 1; i + 1 < n; ++i) rhs[i] = s * (y[i + 1] - 2.0 * y[i] + y[i - 1]);
  // Thomas algorithm.
  for (std::size_t i = 1; i < n; ++i) {
    const double w = lower[i] / diag[i - 1];
    diag[i] -= w * upper[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  m[n - 1] = rhs[n - 1] / diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) m[i] = (rhs[i] - upper[i] * m[i + 1]) / diag[i];
  return m;
}

}  // namespace

std::string_view kind_name(FunctionSpec::Kind kind) noexcept {
  switch (kind) {
    case FunctionSpec::Kind::Zero: return "zero";
    case FunctionSpec::Kind::Constant: return "constant";
    case FunctionSpec::Kind::GaussianBump: return "gaussian-bump";
    case FunctionSpec::Kind::CosineBump: return "cosine-bump";
    case FunctionSpec::Kind::TabulatedGrid: return "tabulated-grid";
  }
  return "unknown";
}

FunctionSpec FunctionSpec::zero() { return FunctionSpec{}; }

FunctionSpec FunctionSpec::constant(double level) {
  require_finite(level, "level");
  FunctionSpec f;
  f.kind_ = Kind::Constant;
  f.level_ = level;
  return f;
}

FunctionSpec FunctionSpec::gaussian(double amplitude, double center, double width, double level) {
  require_finite(amplitude, "amplitude");
  require_finite(center, "center");
  require_finite(level, "level");
  if (!(width > 0.0) || !std::isfinite(width))
    raise(ErrorKind::InvalidArgument, "gaussian-bump width must be positive");
  FunctionSpec f;
  f.kind_ = Kind::GaussianBump;
  f.amplitude_ = amplitude;
  f.center_ = center;
  f.width_ = width;
  f.level_ = level;
  return f;
}

FunctionSpec FunctionSpec::cosine_bump(double amplitude, double center, double width,
                                       double level) {
  require_finite(amplitude, "amplitude");
  require_finite(center, "center");
  require_finite(level, "level");
  if (!(width > 0.0) || !std::isfinite(width))
    raise(ErrorKind::InvalidArgument, "cosine-bump width must be positive");
  FunctionSpec f;
  f.kind_ = Kind::CosineBump;
  f.amplitude_ = amplitude;
  f.center_ = center;
  f.width_ = width;
  f.level_ = level;
  return f;
}

FunctionSpec FunctionSpec::tabulated(double x0, double dx, std::vector<double> values) {
  require_finite(x0, "x0");
  if (!(dx > 0.0) || !std::isfinite(dx))
    raise(ErrorKind::InvalidArgument, "tabulated-grid dx must be positive");
  if (values.empty()) raise(ErrorKind::InvalidArgument, "tabulated-grid needs values");
  for (double v : values) require_finite(v, "tabulated value");
  FunctionSpec f;
  f.kind_ = Kind::TabulatedGrid;
  f.x0_ = x0;
  f.dx_ = dx;
  f.values_ = std::move(values);
  f.m_ = clamped_spline(f.values_, dx);
  return f;
}

bool FunctionSpec::is_zero() const noexcept {
  switch (kind_) {
    case Kind::Zero: return true;
    case Kind::Constant: return level_ == 0.0;
    case Kind::GaussianBump:
    case Kind::CosineBump: return amplitude_ == 0.0 && level_ == 0.0;
    case Kind::TabulatedGrid:
      return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0; });
  }
  return false;
}

bool FunctionSpec::is_constant() const noexcept {
  switch (kind_) {
    case Kind::Zero:
    case Kind::Constant: return true;
    case Kind::GaussianBump:
    case Kind::CosineBump: return amplitude_ == 0.0;
    case Kind::TabulatedGrid:
      return std::all_of(values_.begin(), values_.end(),
                         [&](double v) { return v == values_.front(); });
  }
  return false;
}

double FunctionSpec::eval(double x, int order) const {
  if (order < 0 || order > 2)
    raise(ErrorKind::UnsupportedDerivative, "order must be 0, 1 or 2");
  switch (kind_) {
    case Kind::Zero: return 0.0;
    case Kind::Constant: return order == 0 ? level_ : 0.0;
    case Kind::GaussianBump: {
      const double u = (x - center_) / width_;
      const double g = amplitude_ * std::exp(-0.5 * u * u);
      if (order == 0) return g + level_;
      if (order == 1) return -u / width_ * g;
      return (u * u - 1.0) / (width_ * width_) * g;
    }
    case Kind::CosineBump: {
      const double u = x - center_;
      if (std::fabs(u) >= width_) return order == 0 ? level_ : 0.0;
      const double k = std::numbers::pi / width_;
      if (order == 0) return amplitude_ * 0.5 * (1.0 + std::cos(k * u)) + level_;
      if (order == 1) return -amplitude_ * 0.5 * k * std::sin(k * u);
      return -amplitude_ * 0.5 * k * k * std::cos(k * u);
    }
    case Kind::TabulatedGrid: {
      if (order == 2)
        raise(ErrorKind::UnsupportedDerivative, "tabulated-grid supports order <= 1 only");
      const std::size_t n = values_.size();
      const double xmax = x0_ + static_cast<double>(n - 1) * dx_;
      if (n == 1 || x <= x0_) return order == 0 ? values_.front() : 0.0;
      if (x >= xmax) return order == 0 ? values_.back() : 0.0;
      std::size_t i = static_cast<std::size_t>((x - x0_) / dx_);
      if (i > n - 2) i = n - 2;
      const double xi = x0_ + static_cast<double>(i) * dx_;
      const double B = (x - xi) / dx_;
      const double A = 1.0 - B;
      if (order == 0) {
        return A * values_[i] + B * values_[i + 1] +
               ((A * A * A - A) * m_[i] + (B * B * B - B) * m_[i + 1]) * dx_ * dx_ / 6.0;
      }
      return (values_[i + 1] - values_[i]) / dx_ - (3.0 * A * A - 1.0) / 6.0 * dx_ * m_[i] +
             (3.0 * B * B - 1.0) / 6.0 * dx_ * m_[i + 1];
    }
  }
  return 0.0;
}

double FunctionSpec::lattice_dot(double x, double y0, double dy, std::span<const double> w,
                                 int order) const {
  const std::size_t n = w.size();
  switch (kind_) {
    case Kind::Zero: return 0.0;
    case Kind::Constant: {
      if (order != 0 || level_ == 0.0) return 0.0;
      double s = 0.0;
      for (double v : w) s += v;
      return level_ * s;
    }
    case Kind::GaussianBump: {
      if (order == 0 && level_ == 0.0) {
        // Restrict to |u| < 9 width; the dropped terms are below 1e-17 relative.
        const double u0 = y0 - x - center_;
        const double reach = 9.0 * width_;
        const double jlo = std::ceil((-reach - u0) / dy);
        const double jhi = std::floor((reach - u0) / dy);
        if (jhi < 0.0 || jlo > static_cast<double>(n) - 1.0) return 0.0;
        const std::size_t a = jlo < 0.0 ? 0 : static_cast<std::size_t>(jlo);
        const std::size_t b =
            std::min<std::size_t>(n - 1, static_cast<std::size_t>(jhi));
        if (b < a) return 0.0;
        return amplitude_ * simd::gauss_dot(u0 + static_cast<double>(a) * dy, dy,
                                            0.5 / (width_ * width_),
                                            w.subspan(a, b - a + 1));
      }
      break;
    }
    case Kind::CosineBump: {
      if (level_ == 0.0) {
        const double u0 = y0 - x - center_;
        const double jlo = std::ceil((-width_ - u0) / dy);
        const double jhi = std::floor((width_ - u0) / dy);
        if (jhi < 0.0 || jlo > static_cast<double>(n) - 1.0) return 0.0;
        const std::size_t a = jlo < 0.0 ? 0 : static_cast<std::size_t>(jlo);
        const std::size_t b = std::min<std::size_t>(n - 1, static_cast<std::size_t>(jhi));
        double s = 0.0;
        for (std::size_t j = a; j <= b && j < n; ++j)
          s += eval(y0 + static_cast<double>(j) * dy - x, order) * w[j];
        return s;
      }
      break;
    }
    case Kind::TabulatedGrid: break;
  }
  double s = 0.0;
  for (std::size_t j = 0; j < n; ++j) s += eval(y0 + static_cast<double>(j) * dy - x, order) * w[j];
  return s;
}

double Model::rho(double x, int order) const {
  if (order == 2) raise(ErrorKind::UnsupportedDerivative, "rho is tabulated; order <= 1 only");
  if (order < 0 || order > 2) raise(ErrorKind::UnsupportedDerivative, "order must be 0, 1 or 2");
  const std::size_t n = rho_.size();
  const std::size_t mid = (n - 1) / 2;
  const double dx = grid_.dx();
  const double ax = std::fabs(x);
  const double pos = ax / dx;
  if (pos >= static_cast<double>(n - 1 - mid)) {
    return order == 0 ? rho_.back() : 0.0;
  }
  const std::size_t i = static_cast<std::size_t>(pos);
  const double f = pos - static_cast<double>(i);
  if (order == 0) return (1.0 - f) * rho_[mid + i] + f * rho_[mid + i + 1];
  auto node_slope = [&](std::size_t k) {
    if (k == 0) return (rho_[1] - rho_[0]) / dx;
    if (k == n - 1) return (rho_[n - 1] - rho_[n - 2]) / dx;
    return (rho_[k + 1] - rho_[k - 1]) / (2.0 * dx);
  };
  const double d = (1.0 - f) * node_slope(mid + i) + f * node_slope(mid + i + 1);
  return x < 0.0 ? -d : d;
}

double Model::a(double x, int order) const {
  const double c0 = c_.eval(x, 0);
  if (order == 0) return c0 * c0 + rho0_;
  const double c1 = c_.eval(x, 1);
  if (order == 1) return 2.0 * c0 * c1;
  if (order == 2) {
    const double c2 = c_.eval(x, 2);
    return 2.0 * (c1 * c1 + c0 * c2);
  }
  raise(ErrorKind::UnsupportedDerivative, "order must be 0, 1 or 2");
}

double Model::eval(Coeff which, double x, int order) const {
  switch (which) {
    case Coeff::C: return c_.eval(x, order);
    case Coeff::H: return h_.eval(x, order);
    case Coeff::Sigma: return sigma_.eval(x, order);
    case Coeff::B: return b_.eval(x, order);
    case Coeff::Rho: return rho(x, order);
    case Coeff::A: return a(x, order);
  }
  return 0.0;
}

double eval_coeff(const Model& model, Coeff which, double x, int order) {
  return model.eval(which, x, order);
}

Model build_model(const FunctionSpec& c, const FunctionSpec& h, const FunctionSpec& sigma,
                  const FunctionSpec& b, const QuadGrid& grid) {
  if (!(grid.L > 0.0) || !std::isfinite(grid.L))
    raise(ErrorKind::InvalidArgument, "quadrature half-width L must be positive");
  if (grid.n < 3 || grid.n % 2 == 0)
    raise(ErrorKind::InvalidArgument, "quadrature grid needs an odd node count >= 3");

  Model model;
  model.c_ = c;
  model.h_ = h;
  model.sigma_ = sigma;
  model.b_ = b;
  model.grid_ = grid;

  const std::size_t n = grid.n;
  const double dx = grid.dx();
  double smin = std::numeric_limits<double>::infinity();
  double bmin = std::numeric_limits<double>::infinity();
  double xmin = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = grid.x(i);
    const double s = sigma.eval(x);
    if (s < smin) {
      smin = s;
      xmin = x;
    }
    bmin = std::min(bmin, b.eval(x));
  }
  if (!(smin > 0.0)) {
    std::ostringstream os;
    os << "sigma(" << xmin << ") = " << smin << " is not strictly positive";
    raise(ErrorKind::NonPositiveSigma, os.str());
  }
  model.sigma_min_ = smin;
  model.b0_ = bmin;

  // h on the lattice k*dx, |k| <= 2(n-1), i.e. [-4L, 4L].
  const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(n - 1);
  const std::ptrdiff_t kmax = 2 * half;
  std::vector<double> H(static_cast<std::size_t>(2 * kmax + 1));
  for (std::ptrdiff_t k = -kmax; k <= kmax; ++k)
    H[static_cast<std::size_t>(k + kmax)] = h.eval(static_cast<double>(k) * dx);
  auto Hk = [&](std::ptrdiff_t k) { return H[static_cast<std::size_t>(k + kmax)]; };

  // rho(s dx) = int h(y - s dx) h(y) dy, trapezoid over y in [-2L, 2L].
  const std::ptrdiff_t mid = half / 2;
  model.rho_.assign(n, 0.0);
  for (std::ptrdiff_t s = 0; s <= mid; ++s) {
    double acc = 0.0;
    for (std::ptrdiff_t k = -half; k <= half; ++k) {
      const double w = (k == -half || k == half) ? 0.5 : 1.0;
      acc += w * Hk(k - s) * Hk(k);
    }
    model.rho_[static_cast<std::size_t>(mid + s)] = acc * dx;
    model.rho_[static_cast<std::size_t>(mid - s)] = acc * dx;
  }
  model.rho0_ = model.rho_[static_cast<std::size_t>(mid)];

  // Tail of h^2 beyond the quadrature range [-2L, 2L], integrated out to 4L.
  double tail = 0.0;
  for (std::ptrdiff_t k = half; k <= kmax; ++k) {
    const double w = (k == half || k == kmax) ? 0.5 : 1.0;
    tail += w * (Hk(k) * Hk(k) + Hk(-k) * Hk(-k));
  }
  tail *= dx;
  if (!(tail <= 1e-10 * model.rho0_)) {
    std::ostringstream os;
    os << "h^2 tail beyond |x| > L is " << tail << ", above 1e-10 * rho(0) = "
       << 1e-10 * model.rho0_;
    raise(ErrorKind::NonIntegrableH, os.str());
  }
  return model;
}

}  // namespace sdsmi
