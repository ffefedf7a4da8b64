// Copyright 2026 The sdsmi Authors
// SPDX-License-Identifier: Apache-2.0

#include "sdsmi/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "sdsmi/error.hpp"
#include "sdsmi/grid_ops.hpp"
#include "sdsmi/loglaplace.hpp"
#include "sdsmi/noise.hpp"
#include "sdsmi/parallel.hpp"
#include "sdsmi/particles.hpp"
#include "sdsmi/rng.hpp"
#include "sdsmi/simd/kernels.hpp"

namespace sdsmi {

double riccati_closed_form(double phi, double sigma, double b, double t) noexcept {
  if (b == 0.0) return phi / (1.0 + 0.5 * sigma * phi * t);
  const double e = std::exp(-b * t);
  return b * phi * e / (b + 0.5 * sigma * phi * (1.0 - e));
}

double first_moment_closed_form(double mu_mass, double m_mass, double b, double t) noexcept {
  if (b == 0.0) return mu_mass + t * m_mass;
  const double e = std::exp(-b * t);
  return e * mu_mass + m_mass * (1.0 - e) / b;
}

double riccati_integral(double phi, double sigma, double b, double t) noexcept {
  const double z = b == 0.0 ? t : -std::expm1(-b * t) / b;
  return 2.0 / sigma * std::log1p(0.5 * sigma * phi * z);
}

double stationary_laplace(double lambda, double sigma, double b, double m_mass) noexcept {
  return std::pow(1.0 + sigma * lambda / (2.0 * b), -2.0 * m_mass / sigma);
}

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string tag(double v) { return fmt("%g", v); }

std::uint64_t purpose_seed(const ExperimentConfig& cfg, SeedPurpose p, std::uint64_t i) {
  return derive_seed(cfg.master_seed, static_cast<std::uint64_t>(p), i);
}

/// Noise source: a file shared by every index, or sampled per seed.
class NoiseSource {
 public:
  NoiseSource(const ExperimentConfig& cfg, double horizon) : cfg_(cfg) {
    grid_ = make_noise_grid(horizon, cfg.noise.dt, cfg.quad.L, cfg.noise.dy);
    if (!cfg.noise.file.empty()) {
      file_ = std::make_shared<NoisePath>(read_wns(cfg.noise.file));
      if (file_->grid().t1() < horizon - 1e-9 * horizon)
        raise(ErrorKind::InvalidArgument, "noise file horizon " + tag(file_->grid().t1()) +
                                              " is shorter than " + tag(horizon));
    }
  }

  bool from_file() const noexcept { return file_ != nullptr; }
  const NoiseGrid& grid() const noexcept { return grid_; }

  NoisePath get(std::uint64_t seed) const {
    if (file_) return *file_;
    return sample_path(grid_, seed);
  }
  /// Noise path i of the configured seed list.
  NoisePath indexed(std::size_t i) const {
    if (file_ && i > 0)
      raise(ErrorKind::InvalidArgument, "a noise file provides a single path; noise_count must be 1");
    return get(cfg_.noise_seed(i));
  }
  NoisePath zero() const { return zero_path(grid_); }

 private:
  const ExperimentConfig& cfg_;
  NoiseGrid grid_;
  std::shared_ptr<NoisePath> file_;
};

double max_phi(const FunctionSpec& phi, const SolverGrid& g) {
  double m = 0.0;
  for (std::size_t i = 0; i < g.nx; ++i) m = std::max(m, phi.eval(g.x(i)));
  return m;
}

/// Unbiased sample variance and the standard error of that estimator.
void variance_se(const std::vector<double>& s, double& var, double& se) {
  const double n = static_cast<double>(s.size());
  double mean = 0.0;
  for (double v : s) mean += v;
  mean /= n;
  double m2 = 0.0, m4 = 0.0;
  for (double v : s) {
    const double d = (v - mean) * (v - mean);
    m2 += d;
    m4 += d * d;
  }
  var = m2 / (n - 1.0);
  m4 /= n;
  const double v4 = m4 - var * var * (n - 3.0) / (n - 1.0);
  se = std::sqrt(std::max(v4, 0.0) / n);
}

void require(bool ok, const std::string& what) {
  if (!ok) raise(ErrorKind::InvalidArgument, what);
}

struct Tally {
  std::uint64_t hits = 0;
  std::uint64_t steps = 0;
  void add(const MeasurePath& p) {
    hits += p.boundary_hits;
    steps += p.particle_steps;
  }
  void report(ExperimentReport& r) const {
    const double f = steps ? static_cast<double>(hits) / static_cast<double>(steps) : 0.0;
    r.diagnostics["boundary_hits"] = static_cast<double>(hits);
    r.diagnostics["particle_steps"] = static_cast<double>(steps);
    // Reflection at +-L only approximates the whole line while it is rare.
    r.add_flag("boundary_fraction", 0.0, f, 0.0, 1e-3, f <= 1e-3);
  }
};

ExperimentReport make_report(const ExperimentConfig& cfg) {
  ExperimentReport r;
  r.experiment = cfg.experiment;
  r.config_digest = cfg.digest;
  return r;
}

}  // namespace

ExperimentReport riccati_experiment(const ExperimentConfig& cfg, const RunOptions&) {
  ExperimentReport rep = make_report(cfg);
  const Model model = cfg.build();
  const Params& p = cfg.params;
  require(model.h().is_zero() && model.c().is_zero(),
          "the Riccati reduction needs h = 0 and c = 0");
  require(model.sigma().is_constant() && model.b().is_constant(),
          "the Riccati reduction needs constant sigma and b");
  require(!p.levels.empty(), "params.levels is empty");
  const double sigma = model.sigma().eval(0.0);
  const double b = model.b().eval(0.0);
  const double tol = p.rel_tol > 0.0 ? p.rel_tol : 1e-3;
  const NoiseSource src(cfg, p.t);
  const NoisePath path = src.zero();
  const std::size_t mid = cfg.solver.nx / 2;
  std::uint64_t clips = 0;
  for (double lv : p.levels) {
    const FunctionSpec phi = FunctionSpec::constant(lv);
    const FieldPath f = solve_forward(model, phi, path, cfg.solver, p.t);
    const double pred = riccati_closed_form(lv, sigma, b, p.t);
    double worst = 0.0;
    for (double v : f.back()) worst = std::max(worst, std::fabs(v - pred));
    clips += f.clip_count;
    rep.add("psi/phi=" + tag(lv), pred, f.back()[mid], 0.0, tol * pred);
    rep.add("psi_sup/phi=" + tag(lv), 0.0, worst, 0.0, tol * pred);
    if (!cfg.mu.empty()) {
      const double mass = cfg.mu.total_mass();
      const double expect = std::exp(-mass * pred - cfg.m.total_mass() * riccati_integral(lv, sigma, b, p.t));
      const double got = clf(model, cfg.mu, cfg.m, phi, path, p.t, cfg.solver);
      rep.add("clf/phi=" + tag(lv), expect, got, 0.0, tol * expect);
    }
  }
  rep.diagnostics["clip_count"] = static_cast<double>(clips);
  return rep;
}

ExperimentReport duality_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
  ExperimentReport rep = make_report(cfg);
  const Model model = cfg.build();
  const BranchingLaw law = cfg.build_law();
  const Params& p = cfg.params;
  require(!p.phis.empty(), "params.phis is empty");
  const double nparticles = law.theta() * cfg.mu.total_mass();
  require(nparticles >= 50.0, "theta * <1, mu> = " + tag(nparticles) + " is below 50");
  const double t = p.t;
  const std::size_t nphi = p.phis.size();
  const NoiseSource src(cfg, t);
  const bool cond = p.mode != "unconditional";
  const bool uncond = p.mode != "conditional";
  Tally tally;
  std::uint64_t clips = 0;
  double noise_cfl = 0.0;

  auto one_run = [&](const NoisePath& path, std::uint64_t seed, double* out) -> MeasurePath {
    MeasurePath mp = simulate(model, law, cfg.mu, cfg.m, t, path, seed);
    for (std::size_t j = 0; j < nphi; ++j) out[j] = laplace_value(mp, p.phis[j], t);
    mp.clouds.clear();
    return mp;
  };

  // Within-path variances, for the conditioning signature.
  std::vector<double> pooled_within(nphi, 0.0);
  std::size_t pooled_df = 0;

  if (cond) {
    const std::size_t R = cfg.branch_count;
    if (R < 2) raise(ErrorKind::InsufficientReplicates, "seeds.branch_count must be >= 2");
    for (std::size_t s = 0; s < cfg.noise_count; ++s) {
      const NoisePath path = src.indexed(s);
      std::vector<double> pred(nphi);
      parallel_for(nphi, opts.lanes, [&](std::size_t j) {
        pred[j] = clf(model, cfg.mu, cfg.m, p.phis[j], path, t, cfg.solver);
      });
      {
        const FieldPath probe = solve_backward(model, p.phis[0], 0.0, t, path, cfg.solver);
        clips += probe.clip_count;
        noise_cfl = std::max(noise_cfl, probe.noise_cfl);
      }
      std::vector<double> vals(R * nphi);
      std::vector<MeasurePath> runs(R);
      parallel_for(R, opts.lanes, [&](std::size_t r) {
        runs[r] = one_run(path, cfg.branch_seed(s, r), &vals[r * nphi]);
      });
      for (const auto& mp : runs) tally.add(mp);
      for (std::size_t j = 0; j < nphi; ++j) {
        std::vector<double> col(R);
        for (std::size_t r = 0; r < R; ++r) col[r] = vals[r * nphi + j];
        const EstimateCI e = mean_se(col);
        const std::string name = "noise" + std::to_string(s) + "/phi" + std::to_string(j);
        rep.add(name, pred[j], e.mean, e.std_error, 3.0 * e.std_error + p.margin * pred[j]);
        pooled_within[j] += e.std_error * e.std_error * static_cast<double>(R) *
                            static_cast<double>(R - 1);
      }
      pooled_df += R - 1;
    }
  }

  if (cond && p.conditioning_check) {
    // Same configuration, but every replicate draws its own noise path.
    const std::size_t S = p.shuffle_replicates;
    if (S < 2) raise(ErrorKind::InsufficientReplicates, "params.shuffle_replicates must be >= 2");
    require(!src.from_file(), "the conditioning check needs sampled noise");
    std::vector<double> vals(S * nphi);
    std::vector<MeasurePath> runs(S);
    parallel_for(S, opts.lanes, [&](std::size_t r) {
      const NoisePath path = src.get(purpose_seed(cfg, SeedPurpose::Shuffle, 2 * r));
      runs[r] = one_run(path, purpose_seed(cfg, SeedPurpose::Shuffle, 2 * r + 1), &vals[r * nphi]);
    });
    for (const auto& mp : runs) tally.add(mp);
    for (std::size_t j = 0; j < nphi; ++j) {
      // A constant phi sees only the total mass, which ignores W.
      if (p.phis[j].is_constant()) continue;
      std::vector<double> col(S);
      for (std::size_t r = 0; r < S; ++r) col[r] = vals[r * nphi + j];
      double vs = 0.0, se_s = 0.0;
      variance_se(col, vs, se_s);
      const double vw = pooled_within[j] / static_cast<double>(pooled_df);
      rep.add_flag("conditioning/phi" + std::to_string(j), vs, vw, se_s, 0.0, vw < vs);
    }
  }

  if (uncond) {
    const std::size_t ns = cfg.noise_count;
    const std::size_t np = p.uncond_noise_count;
    const std::size_t nb = p.uncond_branch_per_noise;
    if (ns < 2 || np < 2 || nb < 1)
      raise(ErrorKind::InsufficientReplicates,
            "unconditional check needs noise_count >= 2, uncond_noise_count >= 2 and "
            "uncond_branch_per_noise >= 1");
    std::vector<double> solver(ns * nphi);
    parallel_for(ns, opts.lanes, [&](std::size_t s) {
      const NoisePath path = src.indexed(s);
      for (std::size_t j = 0; j < nphi; ++j)
        solver[s * nphi + j] = clf(model, cfg.mu, cfg.m, p.phis[j], path, t, cfg.solver);
    });
    // Particle side on its own noise paths; clusters are the paths.
    std::vector<double> vals(np * nb * nphi);
    std::vector<Tally> tallies(np);
    parallel_for(np, opts.lanes, [&](std::size_t s) {
      const NoisePath path = src.get(purpose_seed(cfg, SeedPurpose::IndependentNoise, s));
      for (std::size_t r = 0; r < nb; ++r) {
        const std::uint64_t seed =
            purpose_seed(cfg, SeedPurpose::IndependentBranch, (static_cast<std::uint64_t>(s) << 32) | r);
        tallies[s].add(one_run(path, seed, &vals[(s * nb + r) * nphi]));
      }
    });
    for (const auto& tl : tallies) {
      tally.hits += tl.hits;
      tally.steps += tl.steps;
    }
    for (std::size_t j = 0; j < nphi; ++j) {
      std::vector<double> sv(ns), cm(np);
      for (std::size_t s = 0; s < ns; ++s) sv[s] = solver[s * nphi + j];
      for (std::size_t s = 0; s < np; ++s) {
        double acc = 0.0;
        for (std::size_t r = 0; r < nb; ++r) acc += vals[(s * nb + r) * nphi + j];
        cm[s] = acc / static_cast<double>(nb);
      }
      const EstimateCI a = mean_se(sv);
      const EstimateCI b = mean_se(cm);
      const double se = std::hypot(a.std_error, b.std_error);
      rep.add("uncond/phi" + std::to_string(j), a.mean, b.mean, se, 3.0 * se);
      rep.diagnostics["uncond/phi" + std::to_string(j) + "/solver_se"] = a.std_error;
      rep.diagnostics["uncond/phi" + std::to_string(j) + "/particle_se"] = b.std_error;
    }
  }

  tally.report(rep);
  rep.diagnostics["clip_count"] = static_cast<double>(clips);
  rep.diagnostics["noise_cfl"] = noise_cfl;
  rep.diagnostics["initial_particles"] = nparticles;
  rep.notes["margin"] = tag(p.margin);
  return rep;
}

ExperimentReport moment_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
  ExperimentReport rep = make_report(cfg);
  const Model model = cfg.build();
  const BranchingLaw law = cfg.build_law();
  const Params& p = cfg.params;
  require(!p.t_points.empty(), "params.t_points is empty");
  require(model.b().is_constant(), "the closed form needs constant b");
  const std::size_t R = p.replicates;
  if (R < 2) raise(ErrorKind::InsufficientReplicates, "params.replicates must be >= 2");
  const double horizon = *std::max_element(p.t_points.begin(), p.t_points.end());
  const NoiseSource src(cfg, horizon);
  const NoisePath shared = model.h().is_zero() ? src.zero()
                           : src.from_file()   ? src.get(0)
                                               : NoisePath{};
  const bool per_rep = !model.h().is_zero() && !src.from_file();
  const std::size_t nt = p.t_points.size();
  std::vector<double> masses(R * nt);
  std::vector<Tally> tallies(R);
  parallel_for(R, opts.lanes, [&](std::size_t r) {
    const NoisePath own = per_rep ? src.get(purpose_seed(cfg, SeedPurpose::Noise, r)) : NoisePath{};
    const MeasurePath mp = simulate(model, law, cfg.mu, cfg.m, horizon, per_rep ? own : shared,
                                    cfg.branch_seed(0, r));
    for (std::size_t k = 0; k < nt; ++k) masses[r * nt + k] = mp.mass_at(p.t_points[k]);
    tallies[r].add(mp);
  });
  Tally tally;
  for (const auto& tl : tallies) {
    tally.hits += tl.hits;
    tally.steps += tl.steps;
  }
  const double b = model.b().eval(0.0);
  for (std::size_t k = 0; k < nt; ++k) {
    std::vector<double> col(R);
    for (std::size_t r = 0; r < R; ++r) col[r] = masses[r * nt + k];
    const EstimateCI e = mean_se(col);
    const double pred =
        first_moment_closed_form(cfg.mu.total_mass(), cfg.m.total_mass(), b, p.t_points[k]);
    rep.add("mean/t=" + tag(p.t_points[k]), pred, e.mean, e.std_error, 3.0 * e.std_error);
  }
  tally.report(rep);
  return rep;
}

ExperimentReport qv_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
  ExperimentReport rep = make_report(cfg);
  const Model model = cfg.build();
  const BranchingLaw law = cfg.build_law();
  const Params& p = cfg.params;
  const std::size_t R = p.replicates;
  if (R < 2) raise(ErrorKind::InsufficientReplicates, "params.replicates must be >= 2");
  std::vector<double> times = p.t_points;
  if (std::find(times.begin(), times.end(), p.t) == times.end()) times.push_back(p.t);
  std::sort(times.begin(), times.end());
  const double horizon = times.back();
  const NoiseSource src(cfg, horizon);
  const NoisePath shared = model.h().is_zero() ? src.zero()
                           : src.from_file()   ? src.get(0)
                                               : NoisePath{};
  const bool per_rep = !model.h().is_zero() && !src.from_file();
  const std::size_t nt = times.size();
  std::vector<double> masses(R * nt), sig(R * nt);
  std::vector<Tally> tallies(R);
  SimOptions so;
  so.track_sigma = true;
  parallel_for(R, opts.lanes, [&](std::size_t r) {
    const NoisePath own = per_rep ? src.get(purpose_seed(cfg, SeedPurpose::Noise, r)) : NoisePath{};
    const MeasurePath mp = simulate(model, law, cfg.mu, cfg.m, horizon, per_rep ? own : shared,
                                    cfg.branch_seed(0, r), so);
    for (std::size_t k = 0; k < nt; ++k) {
      masses[r * nt + k] = mp.mass_at(times[k]);
      sig[r * nt + k] = mp.sigma_integral.at(time_index(src.grid(), times[k]));
    }
    tallies[r].add(mp);
  });
  Tally tally;
  for (const auto& tl : tallies) {
    tally.hits += tl.hits;
    tally.steps += tl.steps;
  }
  const bool closed = model.sigma().is_constant() && model.b().is_zero() && cfg.m.empty();
  const double sigma = model.sigma().eval(0.0);
  for (std::size_t k = 0; k < nt; ++k) {
    std::vector<double> col(R), scol(R);
    for (std::size_t r = 0; r < R; ++r) {
      col[r] = masses[r * nt + k];
      scol[r] = sig[r * nt + k];
    }
    double var = 0.0, se = 0.0;
    variance_se(col, var, se);
    const EstimateCI si = mean_se(scol);
    const std::string ts = tag(times[k]);
    const bool main_row = times[k] == p.t;
    if (closed) {
      const double pred = sigma * times[k] * cfg.mu.total_mass();
      rep.add("var/t=" + ts, pred, var, se, 3.0 * se, main_row);
      rep.add("var_over_t/t=" + ts, sigma * cfg.mu.total_mass(), var / times[k], se / times[k],
              3.0 * se / times[k], false);
    }
    // The compensator estimated on the same replicates; correlated with var.
    rep.add("var_vs_sigma_integral/t=" + ts, si.mean, var, std::hypot(se, si.std_error),
            3.0 * std::hypot(se, si.std_error), !closed && main_row);
  }
  tally.report(rep);
  return rep;
}

ExperimentReport ergodic_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
  ExperimentReport rep = make_report(cfg);
  const Model model = cfg.build();
  const Params& p = cfg.params;
  const double eps = model.b0();
  if (!(eps > 0.0))
    raise(ErrorKind::HypothesisViolated, "b must be bounded below by a positive constant, inf b = " +
                                             tag(eps));
  require(!p.lambdas.empty() && !p.t_points.empty(), "params.lambdas and params.t_points are required");
  std::vector<double> ts = p.t_points;
  std::sort(ts.begin(), ts.end());
  const NoiseSource src(cfg, ts.back());
  const std::size_t ns = model.h().is_zero() ? 1 : cfg.noise_count;
  const std::size_t nl = p.lambdas.size(), nt = ts.size();
  std::vector<double> vals(ns * nl * nt);
  std::vector<NoisePath> paths(ns);
  parallel_for(ns, opts.lanes, [&](std::size_t s) {
    paths[s] = model.h().is_zero() ? src.zero() : src.indexed(s);
  });
  parallel_for(ns * nl * nt, opts.lanes, [&](std::size_t w) {
    const std::size_t s = w / (nl * nt), l = (w / nt) % nl, k = w % nt;
    vals[w] = forward_immigration_functional(model, cfg.m, FunctionSpec::constant(p.lambdas[l]),
                                             paths[s], ts[k], cfg.solver);
  });
  const bool closed = model.h().is_zero() && model.sigma().is_constant() && model.b().is_constant();
  const double tol = p.rel_tol > 0.0 ? p.rel_tol : 0.01;
  const double mass = cfg.m.total_mass();
  for (std::size_t l = 0; l < nl; ++l) {
    const double lam = p.lambdas[l];
    std::vector<double> Lt(nt);
    for (std::size_t k = 0; k < nt; ++k) {
      std::vector<double> col(ns);
      for (std::size_t s = 0; s < ns; ++s) col[s] = vals[(s * nl + l) * nt + k];
      double acc = 0.0;
      for (double v : col) acc += v;
      Lt[k] = acc / static_cast<double>(ns);
    }
    const std::string ls = "lambda=" + tag(lam);
    if (closed) {
      const double pred = stationary_laplace(lam, model.sigma().eval(0.0), model.b().eval(0.0), mass);
      rep.add("stationary/" + ls, pred, Lt.back(), 0.0, tol * pred);
    }
    const double C = mass * lam / eps;
    double prev = 0.0;
    for (std::size_t k = 0; k + 1 < nt; ++k) {
      const double d = std::fabs(Lt[k + 1] - Lt[k]);
      const double bound = C * std::exp(-eps * ts[k]);
      const std::string nm = ls + "/t=" + tag(ts[k]) + "->" + tag(ts[k + 1]);
      rep.add_flag("cauchy/" + nm, bound, d, 0.0, 0.0, d <= bound);
      if (k > 0) rep.add_flag("cauchy_decreasing/" + nm, prev, d, 0.0, 0.0, d <= prev || d < 1e-12);
      rep.add_flag("monotone/" + nm, Lt[k], Lt[k + 1], 0.0, 1e-12, Lt[k + 1] <= Lt[k] + 1e-12);
      prev = d;
    }
  }
  rep.diagnostics["epsilon"] = eps;
  rep.diagnostics["noise_paths"] = static_cast<double>(ns);
  return rep;
}

ExperimentReport decay_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
  ExperimentReport rep = make_report(cfg);
  const Model model = cfg.build();
  const Params& p = cfg.params;
  require(!p.t_points.empty() && !p.r_fractions.empty() && !p.phis.empty(),
          "params.t_points, params.r_fractions and params.phis are required");
  const double b0 = model.b0();
  const double horizon = *std::max_element(p.t_points.begin(), p.t_points.end());
  const NoiseSource src(cfg, horizon);
  const std::size_t ns = cfg.noise_count, nt = p.t_points.size(), nr = p.r_fractions.size(),
                    nphi = p.phis.size();
  std::vector<double> maxphi(nphi);
  for (std::size_t j = 0; j < nphi; ++j) maxphi[j] = max_phi(p.phis[j], cfg.solver);
  // ratio[s][t][r][phi] = max over s' in [r, t] of psi / (e^{-b0 (t-s')} max phi)
  std::vector<double> ratio(ns * nt * nr * nphi);
  std::vector<std::uint64_t> clips(ns);
  std::vector<double> min_raw(ns, 0.0);
  parallel_for(ns, opts.lanes, [&](std::size_t s) {
    const NoisePath path = src.indexed(s);
    for (std::size_t k = 0; k < nt; ++k) {
      const double t = p.t_points[k];
      for (std::size_t j = 0; j < nphi; ++j) {
        const double rmin = *std::min_element(p.r_fractions.begin(), p.r_fractions.end()) * t;
        const FieldPath f = solve_backward(model, p.phis[j], rmin, t, path, cfg.solver);
        clips[s] += f.clip_count;
        min_raw[s] = std::min(min_raw[s], f.min_raw);
        for (std::size_t q = 0; q < nr; ++q) {
          const double r = p.r_fractions[q] * t;
          double worst = 0.0;
          for (std::size_t i = 0; i < f.size(); ++i) {
            if (f.times[i] < r - 1e-9) continue;
            const double bound = std::exp(-b0 * (t - f.times[i])) * maxphi[j];
            if (bound > 0.0) worst = std::max(worst, f.max_value(i) / bound);
          }
          ratio[((s * nt + k) * nr + q) * nphi + j] = worst;
        }
      }
    }
  });
  std::size_t violations = 0;
  for (std::size_t k = 0; k < nt; ++k) {
    for (std::size_t q = 0; q < nr; ++q) {
      double worst = 0.0;
      for (std::size_t s = 0; s < ns; ++s)
        for (std::size_t j = 0; j < nphi; ++j) {
          const double v = ratio[((s * nt + k) * nr + q) * nphi + j];
          worst = std::max(worst, v);
          if (v > 1.01) ++violations;
        }
      const double t = p.t_points[k];
      rep.add_flag("decay/t=" + tag(t) + "/r=" + tag(p.r_fractions[q] * t), 1.0, worst, 0.0, 0.01,
                   worst <= 1.01);
    }
  }
  std::uint64_t total_clips = 0;
  for (auto c : clips) total_clips += c;
  rep.diagnostics["violations"] = static_cast<double>(violations);
  rep.diagnostics["clip_count"] = static_cast<double>(total_clips);
  rep.diagnostics["min_raw"] = *std::min_element(min_raw.begin(), min_raw.end());
  rep.diagnostics["b0"] = b0;
  return rep;
}

ExperimentReport linear_case_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
  ExperimentReport rep = make_report(cfg);
  const Model model = cfg.build();
  const Params& p = cfg.params;
  const Measure v0 = p.v0 ? *p.v0 : cfg.mu;
  require(v0.rep() == Measure::Rep::Density || v0.empty(), "params.v0 must be a density");
  require(model.b().is_constant(), "the linear case needs constant b");
  require(p.ladder.size() >= 2, "params.ladder needs at least two particle counts");
  const double b = model.b().eval(0.0);
  const double t = p.t;
  const double mass0 = v0.total_mass();
  const NoiseSource src(cfg, t);
  const std::size_t ns = cfg.noise_count;
  const double tol = p.rel_tol > 0.0 ? p.rel_tol : 1e-6;
  const SolverGrid& g = cfg.solver;

  std::vector<NoisePath> paths(ns);
  std::vector<std::vector<double>> dens(ns);
  std::vector<double> ratio(ns);
  parallel_for(ns, opts.lanes, [&](std::size_t s) {
    paths[s] = src.indexed(s);
    const FieldPath f = solve_linear_density(model, v0, paths[s], g, t);
    dens[s].assign(f.back().begin(), f.back().end());
    const double m0 = field_mass(f.at(0), g.dx());
    ratio[s] = m0 > 0.0 ? field_mass(f.back(), g.dx()) / m0 : 0.0;
  });
  const double pred = mass0 > 0.0 ? std::exp(-b * t) : 0.0;
  for (std::size_t s = 0; s < ns; ++s)
    rep.add("mass_ratio/noise" + std::to_string(s), pred, ratio[s], 0.0, tol * std::max(pred, 1e-300));
  if (mass0 == 0.0) return rep;

  // Killing at rate b as a branching law with no offspring.
  const std::size_t nl = p.ladder.size(), nrep = p.reps_per_rung;
  std::vector<double> w1(nl * ns * nrep);
  std::vector<Tally> tallies(w1.size());
  parallel_for(w1.size(), opts.lanes, [&](std::size_t w) {
    const std::size_t l = w / (ns * nrep), s = (w / nrep) % ns;
    const BranchingLaw law =
        BranchingLaw::custom(static_cast<double>(p.ladder[l]) / mass0, b, {1.0});
    const std::uint64_t seed = purpose_seed(cfg, SeedPurpose::Linear, w);
    const MeasurePath mp = simulate(model, law, v0, Measure::zero(), t, paths[s], seed);
    w1[w] = w1_cloud_density(mp.cloud_at(t), g.x(0), g.dx(), dens[s]);
    tallies[w].add(mp);
  });
  Tally tally;
  for (const auto& tl : tallies) {
    tally.hits += tl.hits;
    tally.steps += tl.steps;
  }
  std::vector<EstimateCI> est(nl);
  for (std::size_t l = 0; l < nl; ++l) {
    std::vector<double> col(w1.begin() + static_cast<std::ptrdiff_t>(l * ns * nrep),
                            w1.begin() + static_cast<std::ptrdiff_t>((l + 1) * ns * nrep));
    est[l] = col.size() >= 2 ? mean_se(col) : EstimateCI{col[0], 0.0, 1};
    rep.add("w1/n=" + std::to_string(p.ladder[l]), 0.0, est[l].mean, est[l].std_error, INFINITY,
            false);
  }
  for (std::size_t l = 0; l + 1 < nl; ++l) {
    const std::string nm = std::to_string(p.ladder[l]) + "->" + std::to_string(p.ladder[l + 1]);
    rep.add_flag("w1_decreasing/" + nm, est[l].mean, est[l + 1].mean,
                 std::hypot(est[l].std_error, est[l + 1].std_error), 0.0,
                 est[l + 1].mean < est[l].mean);
    // Expected sqrt(ratio) under the Monte Carlo rate; reported only.
    const double expect =
        std::sqrt(static_cast<double>(p.ladder[l + 1]) / static_cast<double>(p.ladder[l]));
    rep.add("w1_ratio/" + nm, expect, est[l].mean / est[l + 1].mean, 0.0, 0.3 * expect, false);
  }
  tally.report(rep);
  return rep;
}

ExperimentReport cross_solver_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
  (void)opts;
  ExperimentReport rep = make_report(cfg);
  const Model model = cfg.build();
  const Params& p = cfg.params;
  require(!p.phis.empty(), "params.phis is empty");
  require(p.epsilon > 0.0 && p.n > 0, "params.epsilon and params.n are required");
  const double t = p.t;
  const NoiseSource src(cfg, t);
  const NoisePath path = src.indexed(0);
  const SolverGrid& g = cfg.solver;
  const double tol = p.rel_tol > 0.0 ? p.rel_tol : 0.05;
  const double bw = p.bandwidth > 0.0 ? p.bandwidth : default_bandwidth(p.n, g.L);
  const std::vector<double> smoother = kde_matrix(g.nx, g.dx(), bw);
  const std::uint64_t seed = purpose_seed(cfg, SeedPurpose::Weighted, 0);

  for (std::size_t j = 0; j < p.phis.size(); ++j) {
    const std::string js = "phi" + std::to_string(j);
    const FieldPath fd = solve_smoothed(model, p.phis[j], p.epsilon, path, g, t);
    const std::vector<double> fd_s = apply_matrix(smoother, fd.back());
    const double norm = l2_norm(fd_s, g.dx());
    auto discrepancy = [&](double sign, double* raw) {
      WeightedOptions wo;
      wo.grid = g;
      wo.bandwidth = bw;
      wo.weight_noise_sign = sign;
      const FieldPath wp = weighted_particle_solve(model, p.phis[j], p.epsilon, path, p.n, seed, t, wo);
      std::vector<double> d(g.nx), d_raw(g.nx);
      for (std::size_t i = 0; i < g.nx; ++i) {
        d[i] = wp.back()[i] - fd_s[i];
        d_raw[i] = wp.back()[i] - fd.back()[i];
      }
      if (raw) *raw = l2_norm(d_raw, g.dx()) / l2_norm(fd.back(), g.dx());
      return l2_norm(d, g.dx()) / norm;
    };
    double raw = 0.0;
    const double rel = discrepancy(1.0, &raw);
    rep.add("rel_l2/" + js, 0.0, rel, 0.0, tol);
    rep.diagnostics["rel_l2_unsmoothed/" + js] = raw;
    rep.diagnostics["fd_clip_count/" + js] = static_cast<double>(fd.clip_count);
    if (p.sign_diagnostic) rep.add("rel_l2_flipped_sign/" + js, 0.0, discrepancy(-1.0, nullptr), 0.0, tol, false);
  }

  if (!p.epsilons.empty()) {
    // Successive differences of the smoothed solutions along the eps ladder.
    std::vector<double> eps = p.epsilons;
    std::sort(eps.begin(), eps.end(), std::greater<>());
    std::vector<std::vector<double>> sol(eps.size());
    for (std::size_t k = 0; k < eps.size(); ++k) {
      const FieldPath f = solve_smoothed(model, p.phis[0], eps[k], path, g, t);
      sol[k].assign(f.back().begin(), f.back().end());
    }
    double prev = 0.0;
    for (std::size_t k = 0; k + 1 < eps.size(); ++k) {
      std::vector<double> d(g.nx);
      for (std::size_t i = 0; i < g.nx; ++i) d[i] = sol[k + 1][i] - sol[k][i];
      const double dn = l2_norm(d, g.dx());
      if (k > 0)
        rep.add_flag("eps_cauchy/" + tag(eps[k]) + "->" + tag(eps[k + 1]), prev, dn, 0.0, 0.0,
                     dn <= prev, false);
      prev = dn;
    }
  }
  rep.diagnostics["bandwidth"] = bw;
  return rep;
}

std::vector<std::string> export_artifacts(const ExperimentConfig& cfg, const std::string& dir) {
  const Model model = cfg.build();
  const Params& p = cfg.params;
  double horizon = p.t;
  if (!p.t_points.empty()) horizon = *std::max_element(p.t_points.begin(), p.t_points.end());
  const NoiseSource src(cfg, horizon);
  const NoisePath path = model.h().is_zero() ? src.zero() : src.indexed(0);
  std::vector<std::string> files;
  const std::string wns = dir + "/noise.wns";
  write_wns(path, wns);
  files.push_back(wns);
  const std::string csv = dir + "/field.csv";
  SolveOptions so;
  so.record_stride = std::max<std::size_t>(1, static_cast<std::size_t>(horizon / cfg.solver.dt / 100.0));
  const std::string& e = cfg.experiment;
  if ((e == "duality" || e == "decay") && !p.phis.empty()) {
    write_field_csv(solve_backward(model, p.phis[0], 0.0, horizon, path, cfg.solver, so), csv);
  } else if (e == "cross_solver" && !p.phis.empty() && p.epsilon > 0.0) {
    write_field_csv(solve_smoothed(model, p.phis[0], p.epsilon, path, cfg.solver, horizon, so), csv);
  } else if (e == "linear_case") {
    write_field_csv(solve_linear_density(model, p.v0 ? *p.v0 : cfg.mu, path, cfg.solver, horizon, so), csv);
  } else if (e == "riccati" && !p.levels.empty()) {
    write_field_csv(solve_forward(model, FunctionSpec::constant(p.levels[0]), path, cfg.solver, horizon, so), csv);
  } else {
    return files;
  }
  files.push_back(csv);
  return files;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, const RunOptions& opts_in) {
  RunOptions opts = opts_in;
  opts.lanes = resolve_lanes(opts.lanes);
  if (cfg.isa == "scalar") simd::set_isa(simd::Isa::Scalar);
  else if (cfg.isa == "avx2") simd::set_isa(simd::Isa::Avx2);
  else simd::set_isa(simd::detected_isa());
  try {
    const std::string& e = cfg.experiment;
    if (e == "riccati") return riccati_experiment(cfg, opts);
    if (e == "duality") return duality_experiment(cfg, opts);
    if (e == "moment") return moment_experiment(cfg, opts);
    if (e == "qv") return qv_experiment(cfg, opts);
    if (e == "ergodic") return ergodic_experiment(cfg, opts);
    if (e == "decay") return decay_experiment(cfg, opts);
    if (e == "linear_case") return linear_case_experiment(cfg, opts);
    if (e == "cross_solver") return cross_solver_experiment(cfg, opts);
    raise(ErrorKind::ConfigInvalid, "unknown experiment " + e);
  } catch (const Error& err) {
    if (err.kind() == ErrorKind::ConfigInvalid) throw;
    ExperimentReport rep = make_report(cfg);
    rep.add_flag("error", 0.0, 0.0, 0.0, 0.0, false);
    rep.notes["error_kind"] = std::string(to_string(err.kind()));
    rep.notes["error"] = err.what();
    return rep;
  }
}

}  // namespace sdsmi
