// Copyright 2026 The sdsmi Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "sdsmi/harness.hpp"
#include "sdsmi/simd/kernels.hpp"

using namespace sdsmi;
using nlohmann::json;

namespace {

json small_duality() {
  return json::parse(R"({
    "experiment": "duality",
    "model": {"c": {"kind": "constant", "params": {"level": 0.2}},
              "h": {"kind": "gaussian-bump", "params": {"amplitude": 0.25, "width": 1.0}},
              "sigma": {"kind": "constant", "params": {"level": 1.0}},
              "b": {"kind": "constant", "params": {"level": 0.1}},
              "L": 4.0, "quad_n": 201},
    "mu": {"kind": "dirac", "x": 0.0, "mass": 1.0},
    "m": {"kind": "uniform", "lo": -2.0, "hi": 2.0, "mass": 0.5},
    "law": {"scheme": "theorem31", "k": 100},
    "noise": {"dt": 0.01, "dy": 0.1},
    "solver": {"nx": 101, "dt": 0.01},
    "params": {"t": 0.2, "phis": [{"kind": "zero"}], "mode": "both",
               "uncond_noise_count": 3, "uncond_branch_per_noise": 4},
    "seeds": {"master": 7, "noise_count": 2, "branch_count": 20}
  })");
}

ExperimentReport run(const json& j, unsigned lanes = 1) {
  return run_experiment(parse_config(j.dump()), RunOptions{lanes});
}

const ReportRow* find(const ExperimentReport& r, const std::string& name) {
  for (const auto& row : r.rows)
    if (row.name == name) return &row;
  return nullptr;
}

}  // namespace

TEST_CASE("closed-form oracles") {
  CHECK(riccati_closed_form(1.0, 2.0, 0.0, 1.0) == doctest::Approx(0.5));
  CHECK(riccati_closed_form(2.0, 1.0, 0.0, 0.0) == 2.0);
  // b > 0 solution solves psi' = -b psi - sigma psi^2 / 2.
  const double h = 1e-5, t = 0.7;
  const double d = (riccati_closed_form(1.5, 1.3, 0.4, t + h) - riccati_closed_form(1.5, 1.3, 0.4, t - h)) / (2 * h);
  const double p = riccati_closed_form(1.5, 1.3, 0.4, t);
  CHECK(d == doctest::Approx(-0.4 * p - 0.65 * p * p).epsilon(1e-7));
  CHECK(first_moment_closed_form(1.0, 0.0, 0.0, 3.0) == 1.0);
  CHECK(first_moment_closed_form(0.0, 1.0, 0.0, 2.5) == doctest::Approx(2.5));
  CHECK(first_moment_closed_form(1.0, 1.0, 1.0, 1.0) == doctest::Approx(1.0));
  CHECK(riccati_integral(1.0, 2.0, 0.0, 1.0) == doctest::Approx(std::log(2.0)));
  // Integral against a midpoint rule.
  double acc = 0.0;
  for (int i = 0; i < 20000; ++i) acc += riccati_closed_form(0.8, 1.0, 0.3, (i + 0.5) * 1e-4) * 1e-4;
  CHECK(riccati_integral(0.8, 1.0, 0.3, 2.0) == doctest::Approx(acc).epsilon(1e-8));
  CHECK(stationary_laplace(2.0, 2.0, 1.0, 1.0) == doctest::Approx(1.0 / 3.0));
  CHECK(stationary_laplace(0.0, 2.0, 1.0, 1.0) == 1.0);
}

TEST_CASE("report rows, json and csv") {
  CHECK(z_score(1.0, 1.0, 0.0) == 0.0);
  CHECK(z_score(1.5, 1.0, 0.25) == 2.0);
  ExperimentReport r;
  r.experiment = "x";
  r.config_digest = "abc";
  r.add("a", 1.0, 1.05, 0.01, 0.1);
  r.add("b", 1.0, 2.0, 0.01, 0.1, false);
  CHECK(r.rows[0].pass);
  CHECK(!r.rows[1].pass);
  CHECK(r.all_gated_pass());
  r.add_flag("c", 0, 0, 0, 0, false);
  CHECK(!r.all_gated_pass());
  CHECK(r.failed_gated() == 1);
  const auto j = json::parse(r.to_json());
  CHECK(j["experiment"] == "x");
  CHECK(j["config_digest"] == "abc");
  CHECK(j["rows"].size() == 3);
  CHECK(r.to_json() == r.to_json());
  const std::string csv = r.to_csv();
  CHECK(csv.rfind("experiment,row,predicted,estimated,se,z,pass\n", 0) == 0);
  CHECK(std::stod(format_double(0.1)) == 0.1);
}

TEST_CASE("duality with phi = 0 is exact on both sides") {
  const auto rep = run(small_duality());
  CHECK(rep.all_gated_pass());
  CHECK(rep.rows.size() >= 3);
  for (const auto& row : rep.rows) {
    if (row.name == "boundary_fraction") continue;
    CAPTURE(row.name);
    CHECK(row.z == 0.0);
    CHECK(row.estimated == 1.0);
    CHECK(row.predicted == 1.0);
  }
}

TEST_CASE("reports do not depend on the lane count") {
  auto j = small_duality();
  j["params"]["phis"] = json::array({json::parse(R"({"kind": "gaussian-bump", "params": {"amplitude": 0.5, "width": 0.5}})")});
  const std::string one = run(j, 1).to_json();
  CHECK(one == run(j, 3).to_json());
  CHECK(one == run(j, 1).to_json());
  auto seeded = parse_config(j.dump(), 12345);
  CHECK(run_experiment(seeded, {1}).to_json() != one);
}

TEST_CASE("module errors surface as a failed row") {
  auto j = small_duality();
  j["law"]["k"] = 4;
  j["model"]["b"]["params"]["level"] = 0.0;
  const auto rep = run(j);
  CHECK(!rep.all_gated_pass());
  REQUIRE(find(rep, "error") != nullptr);
  CHECK(rep.notes.at("error_kind") == "InvalidScheme");

  j = small_duality();
  j["mu"]["mass"] = 0.3;  // 30 particles
  CHECK(run(j).notes.at("error_kind") == "InvalidArgument");
}

TEST_CASE("ergodic requires a positive lower bound on b") {
  const auto j = json::parse(R"({
    "experiment": "ergodic",
    "model": {"c": {"kind": "zero"}, "h": {"kind": "zero"},
              "sigma": {"kind": "constant", "params": {"level": 2.0}},
              "b": {"kind": "constant", "params": {"level": 1.0}}, "L": 4.0, "quad_n": 101},
    "m": {"kind": "uniform", "lo": -2.0, "hi": 2.0, "mass": 1.0},
    "noise": {"dt": 0.01, "dy": 0.5},
    "solver": {"nx": 21, "dt": 0.01},
    "params": {"lambdas": [0.0, 2.0], "t_points": [2.0, 4.0]}
  })");
  const auto rep = run(j);
  const auto* zero = find(rep, "stationary/lambda=0");
  REQUIRE(zero != nullptr);
  CHECK(zero->estimated == 1.0);
  auto bad = j;
  bad["model"]["b"]["params"]["level"] = 0.0;
  CHECK(run(bad).notes.at("error_kind") == "HypothesisViolated");
}

TEST_CASE("first moment at b = 1 with immigration stays at one") {
  const auto j = json::parse(R"({
    "experiment": "moment",
    "model": {"c": {"kind": "constant", "params": {"level": 0.2}}, "h": {"kind": "zero"},
              "sigma": {"kind": "constant", "params": {"level": 1.0}},
              "b": {"kind": "constant", "params": {"level": 1.0}}, "L": 4.0, "quad_n": 101},
    "mu": {"kind": "dirac", "x": 0.0, "mass": 1.0},
    "m": {"kind": "uniform", "lo": -1.0, "hi": 1.0, "mass": 1.0},
    "law": {"scheme": "theorem31", "k": 25},
    "noise": {"dt": 0.01, "dy": 0.5},
    "params": {"t_points": [0.5, 1.0], "replicates": 400},
    "seeds": {"master": 3}
  })");
  const auto rep = run(j);
  CHECK(rep.all_gated_pass());
  for (const auto& row : rep.rows)
    if (row.name.rfind("mean/", 0) == 0) CHECK(row.predicted == doctest::Approx(1.0));
}

TEST_CASE("scalar and avx2 kernels give the same experiment results") {
  if (simd::detected_isa() != simd::Isa::Avx2) return;
  auto j = json::parse(R"({
    "experiment": "decay",
    "model": {"c": {"kind": "constant", "params": {"level": 0.2}},
              "h": {"kind": "gaussian-bump", "params": {"amplitude": 0.25, "width": 1.0}},
              "sigma": {"kind": "constant", "params": {"level": 1.0}},
              "b": {"kind": "gaussian-bump", "params": {"amplitude": 0.3, "width": 1.0, "level": 0.1}},
              "L": 4.0, "quad_n": 201},
    "noise": {"dt": 0.01, "dy": 0.1},
    "solver": {"nx": 101, "dt": 0.01},
    "params": {"t_points": [1.0], "r_fractions": [0.0, 0.5],
               "phis": [{"kind": "gaussian-bump", "params": {"amplitude": 1.0, "width": 0.5}}]},
    "seeds": {"master": 4, "noise_count": 2}
  })");
  j["isa"] = "scalar";
  const auto a = run(j);
  j["isa"] = "avx2";
  const auto b = run(j);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CAPTURE(a.rows[i].name);
    CHECK(b.rows[i].estimated == doctest::Approx(a.rows[i].estimated).epsilon(1e-10));
  }
}
