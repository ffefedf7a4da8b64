// Copyright 2026 The sdsmi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sdsmi {

/// Closed-form coefficient catalog. Every kind is bounded with bounded first
/// and second derivatives; tabulated-grid exposes only order <= 1.
class FunctionSpec {
 public:
  enum class Kind { Zero, Constant, GaussianBump, CosineBump, TabulatedGrid };

  FunctionSpec() = default;

  static FunctionSpec zero();
  static FunctionSpec constant(double level);
  /// amplitude * exp(-(x-center)^2 / (2 width^2)) + level
  static FunctionSpec gaussian(double amplitude, double center, double width, double level = 0.0);
  /// amplitude * (1 + cos(pi (x-center)/width)) / 2 on |x-center| < width, plus level
  static FunctionSpec cosine_bump(double amplitude, double center, double width,
                                  double level = 0.0);
  /// Clamped (zero end slope) cubic spline through values at x0 + i*dx,
  /// held constant outside the table.
  static FunctionSpec tabulated(double x0, double dx, std::vector<double> values);

  Kind kind() const noexcept { return kind_; }
  double amplitude() const noexcept { return amplitude_; }
  double center() const noexcept { return center_; }
  double width() const noexcept { return width_; }
  double level() const noexcept { return level_; }
  double x0() const noexcept { return x0_; }
  double dx() const noexcept { return dx_; }
  const std::vector<double>& values() const noexcept { return values_; }

  /// Value or derivative. Throws UnsupportedDerivative for order > 2, or for
  /// order 2 on tabulated kinds.
  double eval(double x, int order = 0) const;
  double operator()(double x) const { return eval(x, 0); }

  bool is_zero() const noexcept;
  bool is_constant() const noexcept;

  /// sum_j f(y0 + j*dy - x) * w[j], or f' when order == 1.
  double lattice_dot(double x, double y0, double dy, std::span<const double> w,
                     int order = 0) const;

 private:
  Kind kind_ = Kind::Zero;
  double amplitude_ = 0.0;
  double center_ = 0.0;
  double width_ = 1.0;
  double level_ = 0.0;
  double x0_ = 0.0;
  double dx_ = 1.0;
  std::vector<double> values_;
  std::vector<double> m_;  // spline second derivatives at the knots
};

std::string_view kind_name(FunctionSpec::Kind kind) noexcept;

/// Uniform node grid on [-L, L] with n nodes (n odd keeps x = 0 a node).
struct QuadGrid {
  double L = 8.0;
  std::size_t n = 1601;

  double dx() const noexcept { return 2.0 * L / static_cast<double>(n - 1); }
  double x(std::size_t i) const noexcept { return -L + static_cast<double>(i) * dx(); }
};

enum class Coeff { C, H, Sigma, B, Rho, A };

/// Immutable coefficient bundle (c, h, sigma, b) with derived rho and a.
class Model {
 public:
  const FunctionSpec& c() const noexcept { return c_; }
  const FunctionSpec& h() const noexcept { return h_; }
  const FunctionSpec& sigma() const noexcept { return sigma_; }
  const FunctionSpec& b() const noexcept { return b_; }
  const QuadGrid& grid() const noexcept { return grid_; }
  double L() const noexcept { return grid_.L; }

  double rho0() const noexcept { return rho0_; }
  double b0() const noexcept { return b0_; }
  double sigma_min() const noexcept { return sigma_min_; }
  const std::vector<double>& rho_table() const noexcept { return rho_; }

  double eval(Coeff which, double x, int order = 0) const;
  double a(double x, int order = 0) const;
  double rho(double x, int order = 0) const;

 private:
  friend Model build_model(const FunctionSpec&, const FunctionSpec&, const FunctionSpec&,
                           const FunctionSpec&, const QuadGrid&);
  FunctionSpec c_, h_, sigma_, b_;
  QuadGrid grid_;
  std::vector<double> rho_;  // rho at grid nodes x_i
  double rho0_ = 0.0;
  double b0_ = 0.0;
  double sigma_min_ = 0.0;
};

/// Validates sigma > 0 and the decay of h, then tabulates rho by a
/// trapezoid convolution on the quadrature grid.
Model build_model(const FunctionSpec& c, const FunctionSpec& h, const FunctionSpec& sigma,
                  const FunctionSpec& b, const QuadGrid& grid = {});

/// Free-function form of Model::eval.
double eval_coeff(const Model& model, Coeff which, double x, int order = 0);

}  // namespace sdsmi
