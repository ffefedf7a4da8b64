// Copyright 2026 The sdsmi Authors
// SPDX-License-Identifier: Apache-2.0

#include <string>

#include "doctest.h"
#include "json.hpp"
#include "sdsmi/config.hpp"
#include "sdsmi/error.hpp"
#include "sdsmi/rng.hpp"

using namespace sdsmi;
using nlohmann::json;

namespace {

json base() {
  return json::parse(R"({
    "schema_version": 1,
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
    "params": {"t": 0.2, "phis": [{"kind": "zero"}]},
    "seeds": {"master": 7, "noise_count": 2, "branch_count": 10},
    "output": {"dir": "somewhere"}
  })");
}

ErrorKind kind_of(const json& j) {
  try {
    (void)parse_config(j.dump());
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected a config error");
  return ErrorKind::IoError;
}

}  // namespace

TEST_CASE("a valid config parses into typed fields") {
  const auto cfg = parse_config(base().dump());
  CHECK(cfg.experiment == "duality");
  CHECK(cfg.quad.L == 4.0);
  CHECK(cfg.quad.n == 201);
  CHECK(cfg.solver.L == 4.0);
  CHECK(cfg.solver.nx == 101);
  CHECK(cfg.law.k == 100);
  CHECK(cfg.noise_count == 2);
  CHECK(cfg.branch_count == 10);
  CHECK(cfg.params.phis.size() == 1);
  CHECK(cfg.params.phis[0].is_zero());
  CHECK(cfg.m.total_mass() == doctest::Approx(0.5));
  CHECK(cfg.output_dir == "somewhere");
  CHECK(cfg.digest.size() == 16);
  CHECK(cfg.noise_seed(1) == derive_seed(7, 1, 1));
  CHECK(cfg.branch_seed(1, 3) == derive_seed(7, 2, (1ull << 32) | 3));
  const auto model = cfg.build();
  CHECK(model.b0() == doctest::Approx(0.1));
  CHECK(cfg.build_law().theta() == 100.0);
}

TEST_CASE("schema violations are ConfigInvalid") {
  auto j = base();
  j["bogus"] = 1;
  CHECK(kind_of(j) == ErrorKind::ConfigInvalid);
  j = base();
  j["experiment"] = "nonsense";
  CHECK(kind_of(j) == ErrorKind::ConfigInvalid);
  j = base();
  j["model"]["sigma"]["kind"] = "wavelet";
  CHECK(kind_of(j) == ErrorKind::ConfigInvalid);
  j = base();
  j["model"]["h"]["params"]["width"] = -1.0;
  CHECK(kind_of(j) == ErrorKind::ConfigInvalid);
  j = base();
  j["params"]["levels"] = {1.0};
  CHECK(kind_of(j) == ErrorKind::ConfigInvalid);
  j = base();
  j["params"]["mode"] = "sometimes";
  CHECK(kind_of(j) == ErrorKind::ConfigInvalid);
  j = base();
  j["schema_version"] = 2;
  CHECK(kind_of(j) == ErrorKind::ConfigInvalid);
  j = base();
  j["model"]["quad_n"] = 200;
  CHECK(kind_of(j) == ErrorKind::ConfigInvalid);
  j = base();
  j["seeds"]["master"] = -3;
  CHECK(kind_of(j) == ErrorKind::ConfigInvalid);
  j = base();
  j.erase("model");
  CHECK(kind_of(j) == ErrorKind::ConfigInvalid);
  CHECK_THROWS_AS(parse_config("{not json"), Error);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), Error);
}

TEST_CASE("digest covers numerics only") {
  const auto a = parse_config(base().dump());
  auto j = base();
  j["lanes"] = 4;
  j["output"]["dir"] = "elsewhere";
  CHECK(parse_config(j.dump()).digest == a.digest);
  j = base();
  j["params"]["t"] = 0.3;
  CHECK(parse_config(j.dump()).digest != a.digest);
  // Key order does not matter.
  CHECK(parse_config(json::parse(base().dump(2)).dump()).digest == a.digest);
}

TEST_CASE("seed override replaces the master seed before hashing") {
  const auto a = parse_config(base().dump());
  const auto b = parse_config(base().dump(), 99);
  CHECK(b.master_seed == 99);
  CHECK(b.digest != a.digest);
  auto j = base();
  j["seeds"]["master"] = 99;
  CHECK(parse_config(j.dump()).digest == b.digest);
}

TEST_CASE("explicit noise seeds take precedence") {
  auto j = base();
  j["seeds"] = {{"noise", {11, 12}}};
  const auto cfg = parse_config(j.dump());
  CHECK(cfg.noise_count == 2);
  CHECK(cfg.noise_seed(0) == 11);
  CHECK(cfg.noise_seed(1) == 12);
}
