// Copyright 2026 The sdsmi Authors
// SPDX-License-Identifier: Apache-2.0

#include "sdsmi/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "sdsmi/error.hpp"
#include "sdsmi/noise.hpp"
#include "sdsmi/rng.hpp"

namespace sdsmi {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& where, const std::string& what) {
  raise(ErrorKind::ConfigInvalid, where + ": " + what);
}

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) invalid(where, "expected an object");
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) invalid(where, "unknown key \"" + it.key() + "\"");
}

void only_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) invalid(where, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) invalid(where, "unknown key \"" + it.key() + "\"");
}

const json& need(const json& j, const std::string& where, const char* key) {
  if (!j.contains(key)) invalid(where, std::string("missing \"") + key + "\"");
  return j.at(key);
}

double num(const json& j, const std::string& where) {
  if (!j.is_number()) invalid(where, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) invalid(where, "expected a finite number");
  return v;
}

double num_or(const json& j, const std::string& where, const char* key, double def) {
  return j.contains(key) ? num(j.at(key), where + "." + key) : def;
}

std::uint64_t uint_of(const json& j, const std::string& where) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0))
    invalid(where, "expected a nonnegative integer");
  return j.get<std::uint64_t>();
}

std::uint64_t uint_or(const json& j, const std::string& where, const char* key, std::uint64_t def) {
  return j.contains(key) ? uint_of(j.at(key), where + "." + key) : def;
}

std::string str_or(const json& j, const std::string& where, const char* key, std::string def) {
  if (!j.contains(key)) return def;
  if (!j.at(key).is_string()) invalid(where + "." + key, "expected a string");
  return j.at(key).get<std::string>();
}

std::vector<double> num_list(const json& j, const std::string& where) {
  if (!j.is_array()) invalid(where, "expected an array of numbers");
  std::vector<double> v;
  for (std::size_t i = 0; i < j.size(); ++i) v.push_back(num(j[i], where + "[" + std::to_string(i) + "]"));
  return v;
}

FunctionSpec parse_function(const json& j, const std::string& where) {
  only_keys(j, where, {"kind", "params"});
  const json& k = need(j, where, "kind");
  if (!k.is_string()) invalid(where + ".kind", "expected a string");
  const std::string kind = k.get<std::string>();
  const json p = j.contains("params") ? j.at("params") : json::object();
  const std::string pw = where + ".params";
  try {
    if (kind == "zero") {
      only_keys(p, pw, {});
      return FunctionSpec::zero();
    }
    if (kind == "constant") {
      only_keys(p, pw, {"level"});
      return FunctionSpec::constant(num(need(p, pw, "level"), pw + ".level"));
    }
    if (kind == "gaussian-bump" || kind == "cosine-bump") {
      only_keys(p, pw, {"amplitude", "center", "width", "level"});
      const double a = num_or(p, pw, "amplitude", 1.0);
      const double c = num_or(p, pw, "center", 0.0);
      const double w = num_or(p, pw, "width", 1.0);
      const double l = num_or(p, pw, "level", 0.0);
      return kind == "gaussian-bump" ? FunctionSpec::gaussian(a, c, w, l)
                                     : FunctionSpec::cosine_bump(a, c, w, l);
    }
    if (kind == "tabulated-grid") {
      only_keys(p, pw, {"x0", "dx", "values"});
      return FunctionSpec::tabulated(num(need(p, pw, "x0"), pw + ".x0"),
                                     num(need(p, pw, "dx"), pw + ".dx"),
                                     num_list(need(p, pw, "values"), pw + ".values"));
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ConfigInvalid) throw;
    invalid(where, e.what());
  }
  invalid(where + ".kind", "unknown function kind \"" + kind + "\"");
}

Measure parse_measure(const json& j, const std::string& where, double L) {
  if (!j.is_object()) invalid(where, "expected an object");
  const json& k = need(j, where, "kind");
  if (!k.is_string()) invalid(where + ".kind", "expected a string");
  const std::string kind = k.get<std::string>();
  try {
    if (kind == "zero") {
      only_keys(j, where, {"kind"});
      return Measure::zero();
    }
    if (kind == "dirac") {
      only_keys(j, where, {"kind", "x", "mass"});
      return Measure::dirac(num_or(j, where, "x", 0.0), num_or(j, where, "mass", 1.0));
    }
    if (kind == "atoms") {
      only_keys(j, where, {"kind", "atoms"});
      const json& a = need(j, where, "atoms");
      if (!a.is_array()) invalid(where + ".atoms", "expected [[x, w], ...]");
      std::vector<Atom> atoms;
      for (std::size_t i = 0; i < a.size(); ++i) {
        const auto v = num_list(a[i], where + ".atoms[" + std::to_string(i) + "]");
        if (v.size() != 2) invalid(where + ".atoms", "each atom is [x, w]");
        atoms.push_back({v[0], v[1]});
      }
      return Measure::atomic(std::move(atoms));
    }
    if (kind == "uniform") {
      only_keys(j, where, {"kind", "lo", "hi", "mass", "dx"});
      return Measure::uniform(num(need(j, where, "lo"), where + ".lo"),
                              num(need(j, where, "hi"), where + ".hi"),
                              num_or(j, where, "mass", 1.0), L, num_or(j, where, "dx", 0.05));
    }
    if (kind == "density") {
      only_keys(j, where, {"kind", "function", "dx"});
      const FunctionSpec f = parse_function(need(j, where, "function"), where + ".function");
      const double dx = num_or(j, where, "dx", 0.05);
      const auto n = static_cast<std::size_t>(std::llround(2.0 * L / dx)) + 1;
      std::vector<double> v(n);
      for (std::size_t i = 0; i < n; ++i) {
        v[i] = f.eval(-L + static_cast<double>(i) * dx);
        if (v[i] < 0.0) invalid(where, "density function is negative somewhere");
      }
      return Measure::density(-L, dx, std::move(v));
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ConfigInvalid) throw;
    invalid(where, e.what());
  }
  invalid(where + ".kind", "unknown measure kind \"" + kind + "\"");
}

const std::map<std::string, std::set<std::string>>& experiment_params() {
  static const std::map<std::string, std::set<std::string>> table = {
      {"riccati", {"t", "levels", "rel_tol", "max_runtime"}},
      {"duality",
       {"t", "phis", "mode", "margin", "conditioning_check", "uncond_noise_count",
        "uncond_branch_per_noise", "shuffle_replicates", "max_runtime"}},
      {"moment", {"t_points", "replicates"}},
      {"qv", {"t", "t_points", "replicates"}},
      {"ergodic", {"lambdas", "t_points", "rel_tol"}},
      {"decay", {"t_points", "r_fractions", "phis"}},
      {"linear_case", {"t", "ladder", "reps_per_rung", "v0", "rel_tol"}},
      {"cross_solver",
       {"t", "phis", "epsilon", "epsilons", "n", "bandwidth", "rel_tol", "sign_diagnostic"}},
  };
  return table;
}

Params parse_params(const json& j, const std::string& experiment, double L) {
  const std::string w = "params";
  only_keys(j, w, experiment_params().at(experiment));
  Params p;
  p.t = num_or(j, w, "t", 1.0);
  if (!(p.t > 0.0)) invalid(w + ".t", "must be positive");
  if (j.contains("t_points")) p.t_points = num_list(j["t_points"], w + ".t_points");
  if (j.contains("r_fractions")) p.r_fractions = num_list(j["r_fractions"], w + ".r_fractions");
  if (j.contains("lambdas")) p.lambdas = num_list(j["lambdas"], w + ".lambdas");
  if (j.contains("levels")) p.levels = num_list(j["levels"], w + ".levels");
  if (j.contains("epsilons")) p.epsilons = num_list(j["epsilons"], w + ".epsilons");
  if (j.contains("phis")) {
    if (!j["phis"].is_array()) invalid(w + ".phis", "expected an array of functions");
    for (std::size_t i = 0; i < j["phis"].size(); ++i)
      p.phis.push_back(parse_function(j["phis"][i], w + ".phis[" + std::to_string(i) + "]"));
  }
  p.replicates = uint_or(j, w, "replicates", 0);
  p.n = uint_or(j, w, "n", 0);
  p.epsilon = num_or(j, w, "epsilon", 0.0);
  p.bandwidth = num_or(j, w, "bandwidth", 0.0);
  if (j.contains("ladder")) {
    for (double v : num_list(j["ladder"], w + ".ladder")) {
      if (!(v >= 1.0) || v != std::floor(v)) invalid(w + ".ladder", "expected positive integers");
      p.ladder.push_back(static_cast<std::size_t>(v));
    }
  }
  p.reps_per_rung = uint_or(j, w, "reps_per_rung", 1);
  p.mode = str_or(j, w, "mode", "conditional");
  if (p.mode != "conditional" && p.mode != "unconditional" && p.mode != "both")
    invalid(w + ".mode", "expected conditional, unconditional or both");
  p.margin = num_or(j, w, "margin", 0.0);
  if (j.contains("conditioning_check")) {
    if (!j["conditioning_check"].is_boolean()) invalid(w + ".conditioning_check", "expected a bool");
    p.conditioning_check = j["conditioning_check"].get<bool>();
  }
  if (j.contains("sign_diagnostic")) {
    if (!j["sign_diagnostic"].is_boolean()) invalid(w + ".sign_diagnostic", "expected a bool");
    p.sign_diagnostic = j["sign_diagnostic"].get<bool>();
  }
  p.uncond_noise_count = uint_or(j, w, "uncond_noise_count", 0);
  p.uncond_branch_per_noise = uint_or(j, w, "uncond_branch_per_noise", 0);
  p.shuffle_replicates = uint_or(j, w, "shuffle_replicates", 0);
  if (j.contains("v0")) p.v0 = parse_measure(j["v0"], w + ".v0", L);
  p.rel_tol = num_or(j, w, "rel_tol", 0.0);
  p.max_runtime = num_or(j, w, "max_runtime", 0.0);
  return p;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

Model ExperimentConfig::build() const { return build_model(c, h, sigma, b, quad); }

BranchingLaw ExperimentConfig::build_law() const {
  if (law.scheme == "theorem31") return scaling_scheme(law.k, sigma, b, quad);
  if (law.scheme == "binary-split") return BranchingLaw::binary_split(law.theta, law.gamma);
  return BranchingLaw::custom(law.theta, law.gamma, law.table);
}

std::uint64_t ExperimentConfig::noise_seed(std::size_t i) const {
  if (i < noise_seeds.size()) return noise_seeds[i];
  return derive_seed(master_seed, static_cast<std::uint64_t>(SeedPurpose::Noise), i);
}

std::uint64_t ExperimentConfig::branch_seed(std::size_t noise_index, std::size_t rep) const {
  return derive_seed(master_seed, static_cast<std::uint64_t>(SeedPurpose::Branch),
                     (static_cast<std::uint64_t>(noise_index) << 32) | rep);
}

ExperimentConfig parse_config(const std::string& text, std::optional<std::uint64_t> seed_override) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    invalid("config", std::string("not valid JSON: ") + e.what());
  }
  only_keys(j, "config",
            {"schema_version", "experiment", "model", "mu", "m", "law", "noise", "solver",
             "params", "seeds", "lanes", "isa", "output"});
  ExperimentConfig cfg;
  cfg.schema_version = static_cast<int>(uint_or(j, "config", "schema_version", 1));
  if (cfg.schema_version != 1) invalid("schema_version", "only version 1 is supported");
  const json& ex = need(j, "config", "experiment");
  if (!ex.is_string() || !experiment_params().count(ex.get<std::string>()))
    invalid("experiment", "expected one of riccati, duality, moment, qv, ergodic, decay, "
                          "linear_case, cross_solver");
  cfg.experiment = ex.get<std::string>();

  const json& mj = need(j, "config", "model");
  only_keys(mj, "model", {"c", "h", "sigma", "b", "L", "quad_n"});
  cfg.c = parse_function(need(mj, "model", "c"), "model.c");
  cfg.h = parse_function(need(mj, "model", "h"), "model.h");
  cfg.sigma = parse_function(need(mj, "model", "sigma"), "model.sigma");
  cfg.b = parse_function(need(mj, "model", "b"), "model.b");
  cfg.quad.L = num_or(mj, "model", "L", 8.0);
  cfg.quad.n = uint_or(mj, "model", "quad_n", 1601);
  if (!(cfg.quad.L > 0.0)) invalid("model.L", "must be positive");
  if (cfg.quad.n < 3 || cfg.quad.n % 2 == 0) invalid("model.quad_n", "must be odd and >= 3");
  const double L = cfg.quad.L;

  cfg.mu = j.contains("mu") ? parse_measure(j["mu"], "mu", L) : Measure::zero();
  cfg.m = j.contains("m") ? parse_measure(j["m"], "m", L) : Measure::zero();

  if (j.contains("law")) {
    const json& lj = j["law"];
    only_keys(lj, "law", {"scheme", "k", "theta", "gamma", "table"});
    cfg.law.scheme = str_or(lj, "law", "scheme", "theorem31");
    if (cfg.law.scheme == "theorem31") {
      cfg.law.k = static_cast<unsigned>(uint_of(need(lj, "law", "k"), "law.k"));
    } else if (cfg.law.scheme == "binary-split" || cfg.law.scheme == "custom") {
      cfg.law.theta = num(need(lj, "law", "theta"), "law.theta");
      cfg.law.gamma = num(need(lj, "law", "gamma"), "law.gamma");
      if (cfg.law.scheme == "custom") cfg.law.table = num_list(need(lj, "law", "table"), "law.table");
    } else {
      invalid("law.scheme", "expected theorem31, binary-split or custom");
    }
  }

  if (j.contains("noise")) {
    const json& nj = j["noise"];
    only_keys(nj, "noise", {"dt", "dy", "file"});
    cfg.noise.dt = num_or(nj, "noise", "dt", 1e-3);
    cfg.noise.dy = num_or(nj, "noise", "dy", 0.1);
    cfg.noise.file = str_or(nj, "noise", "file", "");
    if (!(cfg.noise.dt > 0.0) || !(cfg.noise.dy > 0.0)) invalid("noise", "dt and dy must be positive");
  }

  cfg.solver.L = L;
  if (j.contains("solver")) {
    const json& sj = j["solver"];
    only_keys(sj, "solver", {"nx", "dt", "scheme", "cfl_safety", "noise_cfl_safety"});
    cfg.solver.nx = uint_or(sj, "solver", "nx", 201);
    cfg.solver.dt = num_or(sj, "solver", "dt", cfg.noise.dt);
    const std::string scheme = str_or(sj, "solver", "scheme", "semi-implicit");
    if (scheme == "semi-implicit")
      cfg.solver.scheme = Scheme::SemiImplicit;
    else if (scheme == "explicit")
      cfg.solver.scheme = Scheme::Explicit;
    else
      invalid("solver.scheme", "expected semi-implicit or explicit");
    cfg.solver.cfl_safety = num_or(sj, "solver", "cfl_safety", 0.45);
    cfg.solver.noise_cfl_safety = num_or(sj, "solver", "noise_cfl_safety", 0.5);
    if (cfg.solver.nx < 3) invalid("solver.nx", "must be >= 3");
    if (!(cfg.solver.dt > 0.0)) invalid("solver.dt", "must be positive");
  } else {
    cfg.solver.dt = cfg.noise.dt;
  }

  cfg.params = parse_params(j.contains("params") ? j["params"] : json::object(), cfg.experiment, L);

  if (seed_override) {
    if (!j.contains("seeds")) j["seeds"] = json::object();
    j["seeds"]["master"] = *seed_override;
  }
  if (j.contains("seeds")) {
    const json& sj = j["seeds"];
    only_keys(sj, "seeds", {"master", "noise", "noise_count", "branch_count"});
    cfg.master_seed = uint_or(sj, "seeds", "master", 0);
    if (sj.contains("noise")) {
      if (!sj["noise"].is_array()) invalid("seeds.noise", "expected an array of seeds");
      for (std::size_t i = 0; i < sj["noise"].size(); ++i)
        cfg.noise_seeds.push_back(uint_of(sj["noise"][i], "seeds.noise"));
    }
    cfg.noise_count = uint_or(sj, "seeds", "noise_count",
                              cfg.noise_seeds.empty() ? 1 : cfg.noise_seeds.size());
    cfg.branch_count = uint_or(sj, "seeds", "branch_count", 0);
  }
  cfg.lanes = static_cast<unsigned>(uint_or(j, "config", "lanes", 0));
  cfg.isa = str_or(j, "config", "isa", "auto");
  if (cfg.isa != "auto" && cfg.isa != "scalar" && cfg.isa != "avx2")
    invalid("isa", "expected auto, scalar or avx2");
  if (j.contains("output")) {
    only_keys(j["output"], "output", {"dir"});
    cfg.output_dir = str_or(j["output"], "output", "dir", "out");
  }

  // Execution-only settings do not enter the digest.
  json canon = j;
  canon.erase("lanes");
  canon.erase("output");
  cfg.canonical = canon.dump();
  cfg.digest = hex64(fnv1a(cfg.canonical.data(), cfg.canonical.size()));
  return cfg;
}

ExperimentConfig load_config(const std::string& file, std::optional<std::uint64_t> seed_override) {
  std::ifstream in(file);
  if (!in) raise(ErrorKind::ConfigInvalid, "cannot read config " + file);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), seed_override);
}

}  // namespace sdsmi
