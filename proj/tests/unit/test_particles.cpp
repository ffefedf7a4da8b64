// Copyright 2026 The sdsmi Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <vector>

#include "doctest.h"
#include "sdsmi/error.hpp"
#include "sdsmi/particles.hpp"

using namespace sdsmi;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an sdsmi::Error");
  return ErrorKind::IoError;
}

const QuadGrid kQuad{4.0, 401};

Model model_of(double c, const FunctionSpec& h, double sigma = 1.0, double b = 0.0) {
  return build_model(FunctionSpec::constant(c), h, FunctionSpec::constant(sigma),
                     FunctionSpec::constant(b), kQuad);
}

double corr(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

TEST_CASE("scaling scheme worked example k = 9") {
  const auto law = scaling_scheme(9, FunctionSpec::constant(1.0), FunctionSpec::zero(), kQuad);
  double p0, p2, pk;
  law.scheme_probs(0.3, p0, p2, pk);
  CHECK(p0 == doctest::Approx(84.0 / 119).epsilon(1e-12));
  CHECK(p2 == doctest::Approx(28.0 / 119).epsilon(1e-12));
  CHECK(pk == doctest::Approx(7.0 / 119).epsilon(1e-12));
  CHECK(law.q(0.3) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::fabs(law.gamma() * (1.0 - law.q(0.3))) < 1e-12);
  CHECK(law.theta() == 9.0);
  CHECK(law.gamma() == 3.0);
}

TEST_CASE("scaling scheme identities on every node") {
  const auto sigma = FunctionSpec::gaussian(0.5, 0.0, 1.0, 1.0);
  const auto b = FunctionSpec::gaussian(0.4, 0.5, 1.5, 0.1);
  for (unsigned k : {25u, 100u, 400u}) {
    const auto law = scaling_scheme(k, sigma, b, kQuad);
    for (std::size_t i = 0; i < kQuad.n; i += 7) {
      const double x = kQuad.x(i);
      double p0, p2, pk;
      law.scheme_probs(x, p0, p2, pk);
      CHECK(std::fabs(p0 + p2 + pk - 1.0) < 1e-12);
      CHECK(std::fabs(law.gamma() * (1.0 - law.q(x)) - b(x)) < 1e-12);
      CHECK(std::fabs(2 * p2 + k * pk - (1.0 - b(x) / std::sqrt(double(k)))) < 1e-12);
      double total = 0.0;
      for (const auto& o : law.offspring(x)) {
        CHECK(o.count != 1);
        total += o.prob;
      }
      CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("scaling scheme rejects small k") {
  CHECK(kind_of([] { (void)scaling_scheme(4, FunctionSpec::constant(1.0), FunctionSpec::zero(), kQuad); }) ==
        ErrorKind::InvalidScheme);
  CHECK(kind_of([] { (void)scaling_scheme(1, FunctionSpec::constant(1.0), FunctionSpec::zero(), kQuad); }) ==
        ErrorKind::InvalidArgument);
}

TEST_CASE("binary split and custom laws") {
  const auto bs = BranchingLaw::binary_split(10, 2);
  CHECK(bs.q(0.0) == 1.0);
  CHECK(bs.Sigma(0.0) == 1.0);
  CHECK(bs.sample(0.0, 0.25) == 0);
  CHECK(bs.sample(0.0, 0.75) == 2);
  const auto cu = BranchingLaw::custom(1, 1, {0.25, 0.0, 0.5, 0.25});
  CHECK(cu.q(1.0) == doctest::Approx(1.75));
  CHECK(cu.Sigma(1.0) == doctest::Approx(0.25 + 0.5 + 0.25 * 4));
  CHECK(cu.sample(0.0, 0.2) == 0);
  CHECK(cu.sample(0.0, 0.5) == 2);
  CHECK(cu.sample(0.0, 0.9) == 3);
  CHECK(kind_of([] { (void)BranchingLaw::custom(1, 1, {0.5, 0.5}); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([] { (void)BranchingLaw::custom(1, 1, {0.5, 0.0, 0.6}); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([] { (void)BranchingLaw::custom(0, 1, {1.0}); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("initial particles") {
  CHECK(initial_particles(Measure::dirac(0.5, 2.0), 10, 1) == std::vector<double>(20, 0.5));
  const auto u = Measure::uniform(-1.0, 1.0, 1.0, 4.0, 0.05);
  const auto xs = initial_particles(u, 100.5, 3);
  CHECK(xs.size() == 100);
  double m = 0;
  for (double x : xs) {
    CHECK(std::fabs(x) <= 1.05);
    m += x;
  }
  // Stratified: the mean is far tighter than i.i.d. sampling would give.
  CHECK(std::fabs(m / 100) < 0.02);
  CHECK(initial_particles(Measure::zero(), 10, 1).empty());
}

TEST_CASE("pure migration follows the noise lattice sum") {
  const auto h = FunctionSpec::gaussian(0.5, 0.0, 1.0);
  const auto model = model_of(0.0, h);
  const auto path = sample_path(make_noise_grid(0.5, 0.01, 4.0, 0.1), 11);
  const auto law = BranchingLaw::custom(1, 0, {0.5, 0.0, 0.5});
  SimOptions opts;
  opts.record_times = {0.5};
  const auto mp = simulate(model, law, Measure::dirac(0.3), Measure::zero(), 0.5, path, 5, opts);
  double x = 0.3;
  const auto& g = path.grid();
  for (std::size_t i = 0; i < g.nt; ++i) {
    double dx = 0.0;
    for (std::size_t j = 0; j < g.ny; ++j) dx += h(g.y(j) - x) * path.at(i, j);
    x += dx;
  }
  REQUIRE(mp.cloud_at(0.5).size() == 1);
  CHECK(mp.cloud_at(0.5)[0] == doctest::Approx(x).epsilon(1e-12));
  for (std::size_t c : mp.counts) CHECK(c == 1);
  CHECK(mp.mass_at(0.5) == 1.0);
  CHECK(kind_of([&] { (void)mp.cloud_at(0.25); }) == ErrorKind::OffGridTime);
}

TEST_CASE("independent motion has variance c^2 t") {
  const auto model = model_of(0.5, FunctionSpec::zero());
  const auto path = zero_path(make_noise_grid(1.0, 0.01, 4.0, 0.5));
  const auto law = BranchingLaw::custom(1, 0, {0.5, 0.0, 0.5});
  const auto mp = simulate(model, law, Measure::dirac(0.0, 4000), Measure::zero(), 1.0, path, 6);
  const auto& xs = mp.cloud_at(1.0);
  double v = 0;
  for (double x : xs) v += x * x;
  v /= static_cast<double>(xs.size());
  CHECK(v / 0.25 == doctest::Approx(1.0).epsilon(4.0 * std::sqrt(2.0 / 4000)));
  CHECK(mp.boundary_hits == 0);
}

TEST_CASE("critical branching keeps the mean mass") {
  const auto model = model_of(0.0, FunctionSpec::zero());
  const auto path = zero_path(make_noise_grid(1.0, 0.01, 4.0, 0.5));
  const auto law = BranchingLaw::binary_split(10, 1);
  std::vector<double> mass;
  for (std::uint64_t s = 0; s < 600; ++s)
    mass.push_back(simulate(model, law, Measure::dirac(0.0), Measure::zero(), 1.0, path, s).mass(100));
  const auto e = mean_se(mass);
  CHECK(std::fabs(e.mean - 1.0) <= 3.0 * e.std_error);
  // Feller regime: Var = Sigma * gamma / theta * t * mass = 0.1.
  double v = 0;
  for (double m : mass) v += (m - e.mean) * (m - e.mean);
  v /= static_cast<double>(mass.size() - 1);
  CHECK(v == doctest::Approx(0.1).epsilon(0.2));
}

TEST_CASE("immigration adds theta t <1,m> particles on average") {
  const auto model = model_of(0.0, FunctionSpec::zero());
  const auto path = zero_path(make_noise_grid(1.0, 0.01, 4.0, 0.5));
  const auto law = BranchingLaw::custom(5, 0, {0.5, 0.0, 0.5});
  const auto m = Measure::uniform(-1.0, 1.0, 2.0, 4.0, 0.05);
  std::vector<double> counts;
  for (std::uint64_t s = 0; s < 400; ++s) {
    const auto mp = simulate(model, law, Measure::zero(), m, 1.0, path, s);
    counts.push_back(static_cast<double>(mp.counts.back()));
    for (double x : mp.cloud_at(1.0)) CHECK(std::fabs(x) <= 1.05);
  }
  const auto e = mean_se(counts);
  CHECK(std::fabs(e.mean - 10.0) <= 3.0 * e.std_error);
}

TEST_CASE("event log replays the population") {
  const auto model = model_of(0.3, FunctionSpec::gaussian(0.3, 0, 1));
  const auto path = sample_path(make_noise_grid(1.0, 0.01, 4.0, 0.1), 2);
  const auto law = scaling_scheme(100, FunctionSpec::constant(1.0), FunctionSpec::constant(0.2), kQuad);
  SimOptions opts;
  opts.event_log = true;
  const auto mp = simulate(model, law, Measure::dirac(0.0), Measure::uniform(-1, 1, 1, 4, 0.05), 1.0,
                           path, 9, opts);
  CHECK(!mp.events.empty());
  CHECK(replay_counts(mp) == mp.counts);
}

TEST_CASE("simulation is a function of the seed") {
  const auto model = model_of(0.3, FunctionSpec::gaussian(0.3, 0, 1));
  const auto path = sample_path(make_noise_grid(0.5, 0.01, 4.0, 0.1), 2);
  const auto law = BranchingLaw::binary_split(20, 2);
  const auto a = simulate(model, law, Measure::dirac(0.0), Measure::zero(), 0.5, path, 1);
  const auto b = simulate(model, law, Measure::dirac(0.0), Measure::zero(), 0.5, path, 1);
  const auto c = simulate(model, law, Measure::dirac(0.0), Measure::zero(), 0.5, path, 2);
  CHECK(a.clouds == b.clouds);
  CHECK(a.counts == b.counts);
  CHECK(a.clouds != c.clouds);
}

TEST_CASE("shared noise correlates replicates") {
  const auto model = model_of(0.1, FunctionSpec::gaussian(0.5, 0, 1));
  const auto g = make_noise_grid(0.5, 0.01, 4.0, 0.1);
  const auto law = BranchingLaw::custom(10, 0, {0.5, 0.0, 0.5});
  const auto phi = FunctionSpec::gaussian(1.0, 0.3, 0.3);
  std::vector<double> sa, sb, ia, ib;
  for (std::uint64_t r = 0; r < 150; ++r) {
    const auto p = sample_path(g, 100 + r);
    const auto q = sample_path(g, 5000 + r);
    auto val = [&](const NoisePath& np, std::uint64_t seed) {
      return -std::log(laplace_value(simulate(model, law, Measure::dirac(0.0), Measure::zero(), 0.5, np, seed), phi, 0.5));
    };
    sa.push_back(val(p, 2 * r));
    sb.push_back(val(p, 2 * r + 1));
    ia.push_back(val(p, 2 * r));
    ib.push_back(val(q, 2 * r + 1));
  }
  CHECK(corr(sa, sb) > corr(ia, ib) + 0.3);
}

TEST_CASE("positions reflect at the boundary") {
  const auto model = model_of(1.0, FunctionSpec::zero());
  const auto path = zero_path(make_noise_grid(1.0, 0.01, 4.0, 0.5));
  const auto law = BranchingLaw::custom(1, 0, {0.5, 0.0, 0.5});
  const auto mp = simulate(model, law, Measure::dirac(3.95, 50), Measure::zero(), 1.0, path, 3);
  CHECK(mp.boundary_hits > 0);
  CHECK(mp.boundary_fraction() > 0.0);
  for (double x : mp.cloud_at(1.0)) CHECK(std::fabs(x) <= 4.0);
}

TEST_CASE("population cap") {
  const auto model = model_of(0.0, FunctionSpec::zero());
  const auto path = zero_path(make_noise_grid(1.0, 0.01, 4.0, 0.5));
  const auto law = BranchingLaw::custom(100, 0, {0.5, 0.0, 0.5});
  SimOptions opts;
  opts.max_particles = 50;
  CHECK(kind_of([&] {
          (void)simulate(model, law, Measure::zero(), Measure::uniform(-1, 1, 5, 4, 0.05), 1.0, path, 1, opts);
        }) == ErrorKind::PopulationExplosion);
}

TEST_CASE("laplace estimates") {
  const auto model = model_of(0.0, FunctionSpec::zero());
  const auto path = zero_path(make_noise_grid(1.0, 0.1, 4.0, 0.5));
  const auto law = BranchingLaw::custom(1, 0, {0.5, 0.0, 0.5});
  const auto mp = simulate(model, law, Measure::dirac(0.0), Measure::zero(), 1.0, path, 1);
  CHECK(laplace_value(mp, FunctionSpec::zero(), 1.0) == 1.0);
  CHECK(laplace_value(mp, FunctionSpec::constant(0.7), 1.0) == doctest::Approx(std::exp(-0.7)).epsilon(1e-15));
  const auto e = laplace_estimate({mp, mp}, FunctionSpec::constant(0.7), 1.0);
  CHECK(e.std_error == 0.0);
  CHECK(e.n == 2);
  CHECK(kind_of([&] { (void)laplace_estimate({mp}, FunctionSpec::zero(), 1.0); }) ==
        ErrorKind::InsufficientReplicates);
  const auto ms = mean_se({1.0, 2.0, 3.0, 4.0});
  CHECK(ms.mean == 2.5);
  CHECK(ms.std_error == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
}
