// Copyright 2026 The sdsmi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sdsmi/loglaplace.hpp"
#include "sdsmi/measure.hpp"
#include "sdsmi/model.hpp"
#include "sdsmi/particles.hpp"

namespace sdsmi {

struct LawSpec {
  std::string scheme = "theorem31";  // theorem31 | binary-split | custom
  unsigned k = 0;
  double theta = 1.0;
  double gamma = 0.0;
  std::vector<double> table;
};

struct NoiseSpec {
  double dt = 1e-3;
  double dy = 0.1;
  std::string file;  // optional .wns to use instead of sampling
};

/// Experiment-specific parameters; which fields apply depends on the
/// experiment (see validate rules in config.cpp).
struct Params {
  double t = 1.0;
  std::vector<double> t_points;
  std::vector<double> r_fractions;
  std::vector<double> lambdas;
  std::vector<double> levels;
  std::vector<FunctionSpec> phis;
  std::size_t replicates = 0;
  std::size_t n = 0;
  double epsilon = 0.0;
  std::vector<double> epsilons;
  double bandwidth = 0.0;
  std::vector<std::size_t> ladder;
  std::size_t reps_per_rung = 1;
  std::string mode = "conditional";  // conditional | unconditional | both
  double margin = 0.0;
  bool conditioning_check = false;
  std::size_t uncond_noise_count = 0;
  std::size_t uncond_branch_per_noise = 0;
  std::size_t shuffle_replicates = 0;
  std::optional<Measure> v0;
  double rel_tol = 0.0;
  double max_runtime = 0.0;  // seconds; 0 = unchecked
  bool sign_diagnostic = false;
};

struct ExperimentConfig {
  int schema_version = 1;
  std::string experiment;
  FunctionSpec c, h, sigma, b;
  QuadGrid quad;
  Measure mu, m;
  LawSpec law;
  NoiseSpec noise;
  SolverGrid solver;
  Params params;
  std::uint64_t master_seed = 0;
  std::vector<std::uint64_t> noise_seeds;  // explicit list, else derived
  std::size_t noise_count = 1;
  std::size_t branch_count = 0;
  unsigned lanes = 0;
  std::string isa = "auto";
  std::string output_dir = "out";
  std::string canonical;  // canonical JSON of the (overridden) config
  std::string digest;     // hex FNV-1a of canonical

  Model build() const;
  BranchingLaw build_law() const;
  /// Noise seed i (explicit list or derived from the master seed).
  std::uint64_t noise_seed(std::size_t i) const;
  std::uint64_t branch_seed(std::size_t noise_index, std::size_t rep) const;
};

/// Parses and validates; ConfigInvalid on schema errors. The seed
/// override replaces seeds.master before the digest is taken.
ExperimentConfig parse_config(const std::string& text,
                              std::optional<std::uint64_t> seed_override = std::nullopt);
ExperimentConfig load_config(const std::string& file,
                             std::optional<std::uint64_t> seed_override = std::nullopt);

/// Seed derivation purposes.
enum class SeedPurpose : std::uint64_t {
  Noise = 1,
  Branch = 2,
  IndependentNoise = 3,
  IndependentBranch = 4,
  Shuffle = 5,
  Weighted = 6,
  Linear = 7,
};

}  // namespace sdsmi
