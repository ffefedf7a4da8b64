// Copyright 2026 The sdsmi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace sdsmi {

/// Time cells [i dt, (i+1) dt), i < nt, starting at t0 = 0; space cells of
/// width dy = 2L/ny covering [-L, L] with centers y_j = -L + (j + 1/2) dy.
struct NoiseGrid {
  double dt = 0.0;
  std::size_t nt = 0;
  double L = 8.0;
  std::size_t ny = 0;

  double t1() const noexcept { return dt * static_cast<double>(nt); }
  double dy() const noexcept { return 2.0 * L / static_cast<double>(ny); }
  double y(std::size_t j) const noexcept { return -L + (static_cast<double>(j) + 0.5) * dy(); }
  /// First cell center, for lattice sums.
  double y0() const noexcept { return -L + 0.5 * dy(); }
};

/// Builds a grid from a horizon and steps, checking that t1/dt and 2L/dy are
/// integers (to 1e-9 relative).
NoiseGrid make_noise_grid(double t1, double dt, double L, double dy);

/// Index of grid time t, or OffGridTime.
std::size_t time_index(const NoiseGrid& grid, double t);

inline constexpr std::uint64_t kDefaultNoiseBudget = 2ull << 30;

/// Immutable white-noise increments dW[i][j], variance dt*dy each.
class NoisePath {
 public:
  NoisePath() = default;
  NoisePath(NoiseGrid grid, std::uint64_t seed, std::vector<double> increments);

  const NoiseGrid& grid() const noexcept { return grid_; }
  std::uint64_t seed() const noexcept { return seed_; }
  const std::vector<double>& increments() const noexcept { return inc_; }
  std::span<const double> row(std::size_t i) const noexcept {
    return {inc_.data() + i * grid_.ny, grid_.ny};
  }
  double at(std::size_t i, std::size_t j) const noexcept { return inc_[i * grid_.ny + j]; }

 private:
  NoiseGrid grid_;
  std::uint64_t seed_ = 0;
  std::vector<double> inc_;
};

/// Cell-addressed Philox sampling; independent of fill order.
NoisePath sample_path(const NoiseGrid& grid, std::uint64_t seed,
                      std::uint64_t budget_bytes = kDefaultNoiseBudget);

/// All-zero path on the grid (deterministic runs, h = 0 cases).
NoisePath zero_path(const NoiseGrid& grid);

/// Increment over time cell i of the result is minus the source increment
/// over time cell k-1-i, where t = k dt. The result spans [0, t].
NoisePath reverse_path(const NoisePath& path, double t);

/// Copy with every increment negated.
NoisePath negate_path(const NoisePath& path);

/// Left-point sum over cells in [r, t] of f(s_i, y_j) dW[i][j].
double integrate(const NoisePath& path, const std::function<double(double, double)>& f,
                 double r, double t);

/// Orthonormal trigonometric basis on [-L, L]: index 0 is the constant,
/// then cos(m pi y / L), sin(m pi y / L) for m = 1, 2, ...
double trig_basis(std::size_t j, double y, double L) noexcept;

/// Spectral truncation of the noise to floor(1/epsilon) basis directions.
struct SmoothedNoise {
  NoiseGrid grid;
  double epsilon = 0.0;
  std::size_t J = 0;
  std::vector<double> basis;   // J x ny, h_j at cell centers
  std::vector<double> coeffs;  // nt x J, increments of W_j
  std::vector<double> cells;   // nt x ny, sum_j h_j(y) dW_j dy

  std::span<const double> coeff_row(std::size_t i) const noexcept {
    return {coeffs.data() + i * J, J};
  }
  std::span<const double> cell_row(std::size_t i) const noexcept {
    return {cells.data() + i * grid.ny, grid.ny};
  }
  /// The reconstructed cell increments as a NoisePath.
  NoisePath as_path() const;
};

SmoothedNoise spectral_project(const NoisePath& path, double epsilon);

/// .wns binary format: 32-byte little-endian header, row-major float64
/// increments, 8-byte FNV-1a trailer over header and payload.
void write_wns(const NoisePath& path, const std::string& file);
NoisePath read_wns(const std::string& file);

inline constexpr std::uint16_t kWnsVersion = 1;

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const void* data, std::size_t n,
                    std::uint64_t h = 0xcbf29ce484222325ULL) noexcept;

}  // namespace sdsmi
