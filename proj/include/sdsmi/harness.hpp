// Copyright 2026 The sdsmi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "sdsmi/config.hpp"
#include "sdsmi/report.hpp"

namespace sdsmi {

struct RunOptions {
  unsigned lanes = 1;
};

// Each experiment reads its typed inputs from the config. Replicates are
// spread over lanes; every reduction runs in replicate order, so reports do
// not depend on the lane count.

/// Particle Monte Carlo of E^W exp(-<phi, X_t>) against the backward solver,
/// per noise path; and/or the unconditional average over noise paths.
ExperimentReport duality_experiment(const ExperimentConfig& cfg, const RunOptions& opts);
/// E<1, X_t> against the first-moment closed form.
ExperimentReport moment_experiment(const ExperimentConfig& cfg, const RunOptions& opts);
/// Var<1, X_t> against sigma t <1, mu> and the integrated <sigma, X_s>.
ExperimentReport qv_experiment(const ExperimentConfig& cfg, const RunOptions& opts);
/// Stationary Laplace functional and Cauchy differences along a t ladder.
ExperimentReport ergodic_experiment(const ExperimentConfig& cfg, const RunOptions& opts);
/// Linear density SPDE: mass identity and W1 to the particle system.
ExperimentReport linear_case_experiment(const ExperimentConfig& cfg, const RunOptions& opts);
/// max psi_{s,t} against exp(-b0 (t - s)) max phi.
ExperimentReport decay_experiment(const ExperimentConfig& cfg, const RunOptions& opts);
/// Constant-coefficient solver against the Riccati closed form.
ExperimentReport riccati_experiment(const ExperimentConfig& cfg, const RunOptions& opts);
/// Grid solver against the weighted particle system for the smoothed equation.
ExperimentReport cross_solver_experiment(const ExperimentConfig& cfg, const RunOptions& opts);

/// Dispatches on cfg.experiment. Module errors become a failed "error" row;
/// ConfigInvalid propagates.
ExperimentReport run_experiment(const ExperimentConfig& cfg, const RunOptions& opts);

/// Writes noise path 0 as noise.wns and a representative field as
/// field.csv (backward psi for phi 0, the smoothed solution, or the linear
/// density, depending on the experiment). Returns the files written.
std::vector<std::string> export_artifacts(const ExperimentConfig& cfg, const std::string& dir);

/// Closed forms used as oracles.
double riccati_closed_form(double phi, double sigma, double b, double t) noexcept;
double first_moment_closed_form(double mu_mass, double m_mass, double b, double t) noexcept;
/// int_0^t of the Riccati solution.
double riccati_integral(double phi, double sigma, double b, double t) noexcept;
double stationary_laplace(double lambda, double sigma, double b, double m_mass) noexcept;

}  // namespace sdsmi
