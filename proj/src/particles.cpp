// Copyright 2026 The sdsmi Authors
// SPDX-License-Identifier: Apache-2.0

#include "sdsmi/particles.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sdsmi/error.hpp"
#include "sdsmi/rng.hpp"

namespace sdsmi {

BranchingLaw BranchingLaw::binary_split(double theta, double gamma) {
  return custom(theta, gamma, {0.5, 0.0, 0.5});
}

BranchingLaw BranchingLaw::custom(double theta, double gamma, std::vector<double> table) {
  if (!(theta > 0.0)) raise(ErrorKind::InvalidArgument, "theta must be positive");
  if (!(gamma >= 0.0)) raise(ErrorKind::InvalidArgument, "gamma must be >= 0");
  if (table.empty()) raise(ErrorKind::InvalidArgument, "offspring table is empty");
  if (table.size() > 1 && table[1] != 0.0)
    raise(ErrorKind::InvalidArgument, "offspring table must have p_1 = 0");
  double sum = 0.0;
  for (double p : table) {
    if (!(p >= 0.0 && p <= 1.0)) raise(ErrorKind::InvalidArgument, "offspring probability outside [0,1]");
    sum += p;
  }
  if (std::fabs(sum - 1.0) > 1e-12)
    raise(ErrorKind::InvalidArgument, "offspring probabilities must sum to 1");
  BranchingLaw law;
  law.kind_ = table == std::vector<double>{0.5, 0.0, 0.5} ? Kind::BinarySplit : Kind::Custom;
  law.theta_ = theta;
  law.gamma_ = gamma;
  law.table_ = std::move(table);
  double acc = 0.0;
  for (double p : law.table_) {
    acc += p;
    law.cdf_.push_back(acc);
  }
  return law;
}

void BranchingLaw::scheme_probs(double x, double& p0, double& p2, double& pk) const {
  const double k = static_cast<double>(k_);
  const double sk = std::sqrt(k) * sigma_.eval(x) + 1.0;
  const double bk = b_.eval(x) / std::sqrt(k);
  const double km1 = k - 1.0;
  const double den = 2.0 * km1 * km1 - k;
  p2 = (km1 * km1 * (1.0 - bk) - k * sk) / den;
  pk = (2.0 * sk - 1.0 + bk) / den;
  p0 = 1.0 - p2 - pk;
}

std::vector<BranchingLaw::Outcome> BranchingLaw::offspring(double x) const {
  std::vector<Outcome> out;
  if (kind_ == Kind::Theorem31) {
    double p0, p2, pk;
    scheme_probs(x, p0, p2, pk);
    out = {{0, p0}, {2, p2}, {k_, pk}};
    return out;
  }
  for (std::size_t i = 0; i < table_.size(); ++i)
    if (table_[i] > 0.0) out.push_back({static_cast<unsigned>(i), table_[i]});
  return out;
}

double BranchingLaw::q(double x) const {
  double s = 0.0;
  for (const auto& o : offspring(x)) s += o.count * o.prob;
  return s;
}

double BranchingLaw::Sigma(double x) const {
  double s = 0.0;
  for (const auto& o : offspring(x)) {
    const double d = static_cast<double>(o.count) - 1.0;
    s += o.prob * d * d;
  }
  return s;
}

unsigned BranchingLaw::sample(double x, double u) const {
  if (kind_ == Kind::Theorem31) {
    double p0, p2, pk;
    scheme_probs(x, p0, p2, pk);
    if (u < p0) return 0;
    if (u < p0 + p2) return 2;
    return k_;
  }
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) return static_cast<unsigned>(cdf_.size() - 1);
  return static_cast<unsigned>(it - cdf_.begin());
}

BranchingLaw scaling_scheme(unsigned k, const FunctionSpec& sigma, const FunctionSpec& b,
                            const QuadGrid& grid) {
  if (k < 2) raise(ErrorKind::InvalidArgument, "scheme needs k >= 2");
  const double kd = static_cast<double>(k);
  if (!(2.0 * (kd - 1.0) * (kd - 1.0) - kd > 0.0)) {
    std::ostringstream os;
    os << "k = " << k << ": normalizer 2(k-1)^2 - k is not positive";
    raise(ErrorKind::InvalidScheme, os.str());
  }
  BranchingLaw law;
  law.kind_ = BranchingLaw::Kind::Theorem31;
  law.theta_ = kd;
  law.gamma_ = std::sqrt(kd);
  law.k_ = k;
  law.sigma_ = sigma;
  law.b_ = b;
  for (std::size_t i = 0; i < grid.n; ++i) {
    const double x = grid.x(i);
    double p[3];
    law.scheme_probs(x, p[0], p[1], p[2]);
    const char* names[3] = {"p_0", "p_2", "p_k"};
    for (int w = 0; w < 3; ++w) {
      if (!(p[w] >= 0.0 && p[w] <= 1.0)) {
        std::ostringstream os;
        os << "k = " << k << ", x = " << x << ": " << names[w] << " = " << p[w]
           << " outside [0, 1]";
        raise(ErrorKind::InvalidScheme, os.str());
      }
    }
  }
  return law;
}

double MeasurePath::mass_at(double t) const {
  const double r = t / dt;
  const double k = std::round(r);
  if (!(k >= 0.0) || std::fabs(r - k) > 1e-9 * std::max(1.0, k) ||
      k > static_cast<double>(nsteps))
    raise(ErrorKind::OffGridTime, "time is not a simulated step");
  return mass(static_cast<std::size_t>(k));
}

const std::vector<double>& MeasurePath::cloud_at(double t) const {
  for (std::size_t k = 0; k < record_steps.size(); ++k) {
    const double tk = static_cast<double>(record_steps[k]) * dt;
    if (std::fabs(tk - t) <= 1e-9 * std::max(1.0, std::fabs(t))) return clouds[k];
  }
  std::ostringstream os;
  os << "no cloud recorded at t = " << t;
  raise(ErrorKind::OffGridTime, os.str());
}

std::vector<double> initial_particles(const Measure& init, double theta, std::uint64_t seed) {
  std::vector<double> xs;
  if (init.empty()) return xs;
  if (init.rep() == Measure::Rep::Atomic) {
    for (const Atom& a : init.atoms()) {
      const auto n = static_cast<std::size_t>(std::llround(theta * a.w));
      xs.insert(xs.end(), n, a.x);
    }
    return xs;
  }
  const auto n = static_cast<std::size_t>(std::floor(theta * init.total_mass()));
  Stream s(seed, StreamTag::Init, 0);
  xs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = (static_cast<double>(i) + s.uniform()) / static_cast<double>(n);
    xs.push_back(init.sample(u));
  }
  return xs;
}

MeasurePath simulate(const Model& model, const BranchingLaw& law, const Measure& init,
                     const Measure& m, double horizon, const NoisePath& path, std::uint64_t seed,
                     const SimOptions& opts) {
  const NoiseGrid& g = path.grid();
  const std::size_t nsteps = time_index(g, horizon);
  const double L = g.L;
  if (std::fabs(L - model.L()) > 1e-9 * L)
    raise(ErrorKind::InvalidArgument, "noise grid and model use different L");
  const double dt = g.dt;
  const double y0 = g.y0();
  const double dy = g.dy();
  const double sqdt = std::sqrt(dt);
  const double theta = law.theta();
  const double p_branch = -std::expm1(-law.gamma() * dt);
  const double lambda_imm = theta * dt * m.total_mass();
  const FunctionSpec& c = model.c();
  const FunctionSpec& h = model.h();
  const bool move_bm = !c.is_zero();
  const bool move_noise = !h.is_zero();

  MeasurePath out;
  out.theta = theta;
  out.dt = dt;
  out.nsteps = nsteps;
  std::vector<char> record(nsteps + 1, 0);
  for (double t : opts.record_times) {
    const std::size_t k = time_index(g, t);
    if (k > nsteps) raise(ErrorKind::OffGridTime, "record time beyond horizon");
    record[k] = 1;
  }
  record[nsteps] = 1;

  std::vector<double> xs = initial_particles(init, theta, seed);
  std::vector<std::uint64_t> ids(xs.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
  std::uint64_t next_id = ids.size();
  out.initial_count = xs.size();
  out.counts.reserve(nsteps + 1);
  out.counts.push_back(xs.size());
  if (opts.track_sigma) out.sigma_integral.assign(1, 0.0);

  auto store = [&](std::size_t step) {
    if (!record[step]) return;
    out.record_steps.push_back(step);
    out.clouds.push_back(xs);
  };
  store(0);

  std::vector<double> nxs;
  std::vector<std::uint64_t> nids;
  for (std::size_t step = 0; step < nsteps; ++step) {
    if (opts.track_sigma) {
      double s = 0.0;
      for (double x : xs) s += model.sigma().eval(x);
      out.sigma_integral.push_back(out.sigma_integral.back() + dt * s / theta);
    }
    const auto row = path.row(step);
    // (i) migration
    for (std::size_t p = 0; p < xs.size(); ++p) {
      double x = xs[p];
      double dx = 0.0;
      if (move_bm) {
        Stream mv(seed, StreamTag::Move, ids[p], step);
        dx += c.eval(x) * sqdt * mv.normal();
      }
      if (move_noise) dx += h.lattice_dot(x, y0, dy, row);
      x += dx;
      if (x > L || x < -L) {
        ++out.boundary_hits;
        x = x > L ? 2.0 * L - x : -2.0 * L - x;
        x = std::clamp(x, -L, L);
      }
      xs[p] = x;
    }
    out.particle_steps += xs.size();
    // (ii) branching
    if (p_branch > 0.0) {
      nxs.clear();
      nids.clear();
      for (std::size_t p = 0; p < xs.size(); ++p) {
        Stream br(seed, StreamTag::Branch, ids[p], step);
        if (br.uniform() >= p_branch) {
          nxs.push_back(xs[p]);
          nids.push_back(ids[p]);
          continue;
        }
        const unsigned eta = law.sample(xs[p], br.uniform());
        if (opts.event_log)
          out.events.push_back({ParticleEvent::Type::Branch, static_cast<std::uint32_t>(step),
                                ids[p], eta, xs[p]});
        for (unsigned e = 0; e < eta; ++e) {
          nxs.push_back(xs[p]);
          nids.push_back(next_id++);
        }
      }
      xs.swap(nxs);
      ids.swap(nids);
    }
    // (iii) immigration
    if (lambda_imm > 0.0) {
      Stream im(seed, StreamTag::Immigration, step);
      const std::uint64_t n = im.poisson(lambda_imm);
      if (n > 0 && opts.event_log)
        out.events.push_back({ParticleEvent::Type::Immigration, static_cast<std::uint32_t>(step),
                              next_id, static_cast<std::uint32_t>(n), 0.0});
      for (std::uint64_t k = 0; k < n; ++k) {
        xs.push_back(m.sample(im.uniform()));
        ids.push_back(next_id++);
      }
    }
    if (xs.size() > opts.max_particles) {
      std::ostringstream os;
      os << "live count " << xs.size() << " exceeds cap " << opts.max_particles << " at t = "
         << static_cast<double>(step + 1) * dt;
      raise(ErrorKind::PopulationExplosion, os.str());
    }
    out.counts.push_back(xs.size());
    store(step + 1);
  }
  return out;
}

std::vector<std::size_t> replay_counts(const MeasurePath& path) {
  std::vector<std::size_t> counts(path.nsteps + 1, 0);
  long long live = static_cast<long long>(path.initial_count);
  counts[0] = path.initial_count;
  std::size_t e = 0;
  for (std::size_t step = 0; step < path.nsteps; ++step) {
    for (; e < path.events.size() && path.events[e].step == step; ++e) {
      const auto& ev = path.events[e];
      if (ev.type == ParticleEvent::Type::Branch)
        live += static_cast<long long>(ev.count) - 1;
      else
        live += ev.count;
    }
    counts[step + 1] = static_cast<std::size_t>(live);
  }
  return counts;
}

EstimateCI mean_se(const std::vector<double>& samples) {
  EstimateCI ci;
  ci.n = samples.size();
  if (ci.n == 0) return ci;
  double s = 0.0;
  for (double v : samples) s += v;
  ci.mean = s / static_cast<double>(ci.n);
  if (ci.n < 2) return ci;
  double ss = 0.0;
  for (double v : samples) ss += (v - ci.mean) * (v - ci.mean);
  ci.std_error = std::sqrt(ss / static_cast<double>(ci.n - 1) / static_cast<double>(ci.n));
  return ci;
}

double laplace_value(const MeasurePath& path, const FunctionSpec& phi, double t) {
  const auto& cloud = path.cloud_at(t);
  double s = 0.0;
  for (double x : cloud) s += phi.eval(x);
  return std::exp(-s / path.theta);
}

EstimateCI laplace_estimate(const std::vector<MeasurePath>& paths, const FunctionSpec& phi,
                            double t) {
  if (paths.size() < 2)
    raise(ErrorKind::InsufficientReplicates, "laplace_estimate needs at least 2 replicates");
  std::vector<double> v;
  v.reserve(paths.size());
  for (const auto& p : paths) v.push_back(laplace_value(p, phi, t));
  return mean_se(v);
}

}  // namespace sdsmi
