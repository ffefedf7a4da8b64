// Copyright 2026 The sdsmi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "sdsmi/measure.hpp"
#include "sdsmi/model.hpp"
#include "sdsmi/noise.hpp"

namespace sdsmi {

/// Branching mechanism: particles of mass 1/theta branch at rate gamma into
/// eta ~ p(x, .) offspring, with p_1 = 0.
class BranchingLaw {
 public:
  enum class Kind { BinarySplit, Theorem31, Custom };

  struct Outcome {
    unsigned count;
    double prob;
  };

  static BranchingLaw binary_split(double theta, double gamma);
  /// Location-independent table p_0, p_1 (must be 0), p_2, ...
  static BranchingLaw custom(double theta, double gamma, std::vector<double> table);

  Kind kind() const noexcept { return kind_; }
  double theta() const noexcept { return theta_; }
  double gamma() const noexcept { return gamma_; }
  unsigned k() const noexcept { return k_; }
  const FunctionSpec& sigma_spec() const noexcept { return sigma_; }
  const FunctionSpec& b_spec() const noexcept { return b_; }
  const std::vector<double>& table() const noexcept { return table_; }

  /// Offspring law at x (zero-probability outcomes may be omitted).
  std::vector<Outcome> offspring(double x) const;
  /// For Theorem31, {p0, p2, pk} at x.
  void scheme_probs(double x, double& p0, double& p2, double& pk) const;
  /// Mean offspring number.
  double q(double x) const;
  /// sum_i p_i (i - 1)^2
  double Sigma(double x) const;
  /// Offspring count for uniform u in (0,1).
  unsigned sample(double x, double u) const;

 private:
  friend BranchingLaw scaling_scheme(unsigned k, const FunctionSpec& sigma,
                                     const FunctionSpec& b, const QuadGrid& grid);
  Kind kind_ = Kind::BinarySplit;
  double theta_ = 1.0;
  double gamma_ = 0.0;
  unsigned k_ = 0;
  FunctionSpec sigma_, b_;
  std::vector<double> table_;
  std::vector<double> cdf_;
};

/// theta_k = k, gamma_k = sqrt(k), offspring on {0, 2, k}. Validates the
/// probabilities on every node of `grid`; InvalidScheme otherwise.
BranchingLaw scaling_scheme(unsigned k, const FunctionSpec& sigma, const FunctionSpec& b,
                            const QuadGrid& grid = {});

struct ParticleEvent {
  enum class Type : std::uint8_t { Branch, Immigration };
  Type type;
  std::uint32_t step;
  std::uint64_t id;        // parent id for Branch, first new id for Immigration
  std::uint32_t count;     // offspring or immigrant count
  double x;
};

/// Recorded trajectory of Y_t = theta^{-1} sum of unit atoms.
struct MeasurePath {
  double theta = 1.0;
  double dt = 0.0;
  std::size_t nsteps = 0;
  std::vector<std::size_t> record_steps;
  std::vector<std::vector<double>> clouds;  // positions at record_steps
  std::vector<std::size_t> counts;          // live count after each step, size nsteps+1
  std::vector<double> sigma_integral;       // int_0^{t_i} <sigma, Y_s> ds, left point
  std::vector<ParticleEvent> events;
  std::size_t initial_count = 0;
  std::uint64_t boundary_hits = 0;
  std::uint64_t particle_steps = 0;

  double mass(std::size_t step) const { return static_cast<double>(counts.at(step)) / theta; }
  double mass_at(double t) const;
  /// Cloud at time t; t must be a recorded time.
  const std::vector<double>& cloud_at(double t) const;
  double boundary_fraction() const noexcept {
    return particle_steps ? static_cast<double>(boundary_hits) / static_cast<double>(particle_steps)
                          : 0.0;
  }
};

struct SimOptions {
  std::size_t max_particles = 2'000'000;
  /// Times at which the cloud is stored; the horizon is always stored.
  std::vector<double> record_times;
  bool event_log = false;
  bool track_sigma = false;
};

/// Euler-Maruyama migration through the shared noise, Bernoulli branching
/// per step, Poisson immigration. Steps on the noise grid.
MeasurePath simulate(const Model& model, const BranchingLaw& law, const Measure& init,
                     const Measure& m, double horizon, const NoisePath& path, std::uint64_t seed,
                     const SimOptions& opts = {});

/// Initial particle positions (stratified for densities).
std::vector<double> initial_particles(const Measure& init, double theta, std::uint64_t seed);

/// Replays an event log from the initial count; returns counts per step.
std::vector<std::size_t> replay_counts(const MeasurePath& path);

struct EstimateCI {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
};

/// Mean and standard error over samples, accumulated in order.
EstimateCI mean_se(const std::vector<double>& samples);

/// exp(-<phi, Y_t>) for one path.
double laplace_value(const MeasurePath& path, const FunctionSpec& phi, double t);

/// Monte Carlo estimate of E exp(-<phi, X_t>). InsufficientReplicates if < 2.
EstimateCI laplace_estimate(const std::vector<MeasurePath>& paths, const FunctionSpec& phi,
                            double t);

}  // namespace sdsmi
