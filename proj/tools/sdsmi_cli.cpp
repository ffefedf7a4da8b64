// Copyright 2026 The sdsmi Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line entry point. Exit codes: 0 all gated rows pass, 1 a gated
// row failed, 2 configuration error, 3 runtime error.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "sdsmi/config.hpp"
#include "sdsmi/error.hpp"
#include "sdsmi/harness.hpp"
#include "sdsmi/noise.hpp"
#include "sdsmi/parallel.hpp"
#include "sdsmi/simd/kernels.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct Common {
  std::string config;
  std::string out;
  unsigned lanes = 0;
  std::optional<std::uint64_t> seed_override;
};

void write_text(const std::string& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  out << text;
  if (!out) sdsmi::raise(sdsmi::ErrorKind::IoError, "cannot write " + file);
}

sdsmi::ExperimentConfig load(const Common& c) { return sdsmi::load_config(c.config, c.seed_override); }

int cmd_run(const Common& c, bool fields, bool quiet) {
  const sdsmi::ExperimentConfig cfg = load(c);
  const std::string dir = c.out.empty() ? cfg.output_dir : c.out;
  std::filesystem::create_directories(dir);
  sdsmi::RunOptions opts;
  opts.lanes = c.lanes ? c.lanes : cfg.lanes;
  const auto t0 = std::chrono::steady_clock::now();
  const sdsmi::ExperimentReport rep = sdsmi::run_experiment(cfg, opts);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  write_text(dir + "/report.json", rep.to_json());
  write_text(dir + "/report.csv", rep.to_csv());
  nlohmann::json timing = {{"runtime_seconds", secs},
                           {"lanes", sdsmi::resolve_lanes(opts.lanes)},
                           {"isa", std::string(sdsmi::simd::isa_name(sdsmi::simd::active_isa()))}};
  write_text(dir + "/timing.json", timing.dump(2) + "\n");
  if (fields && !rep.notes.count("error_kind")) {
    for (const auto& f : sdsmi::export_artifacts(cfg, dir))
      if (!quiet) std::cout << "wrote " << f << "\n";
  }

  if (!quiet) {
    for (const auto& row : rep.rows) {
      std::printf("%-4s %-44s predicted=%-12.6g estimated=%-12.6g se=%-10.3g%s\n",
                  row.pass ? "ok" : (row.gated ? "FAIL" : "off"), row.name.c_str(), row.predicted, row.estimated, row.se,
                  row.gated ? "" : "  (not gated)");
    }
    std::printf("%s: %zu rows, %zu gated failures, %.2f s\n", rep.experiment.c_str(),
                rep.rows.size(), rep.failed_gated(), secs);
  }
  if (rep.notes.count("error_kind")) {
    std::cerr << "error: " << rep.notes.at("error") << "\n";
    return kExitRuntime;
  }
  return rep.all_gated_pass() ? kExitPass : kExitFail;
}

int cmd_export_noise(const Common& c, std::size_t index, double horizon) {
  const sdsmi::ExperimentConfig cfg = load(c);
  double t = horizon > 0.0 ? horizon : cfg.params.t;
  if (horizon <= 0.0 && !cfg.params.t_points.empty())
    for (double v : cfg.params.t_points) t = std::max(t, v);
  const sdsmi::NoiseGrid grid = sdsmi::make_noise_grid(t, cfg.noise.dt, cfg.quad.L, cfg.noise.dy);
  const sdsmi::NoisePath path = sdsmi::sample_path(grid, cfg.noise_seed(index));
  const std::string file = c.out.empty() ? "noise.wns" : c.out;
  sdsmi::write_wns(path, file);
  std::printf("wrote %s: nt=%zu ny=%zu dt=%g dy=%g seed=%llu\n", file.c_str(), grid.nt, grid.ny,
              grid.dt, grid.dy(), static_cast<unsigned long long>(path.seed()));
  return kExitPass;
}

int cmd_import_noise(const std::string& file, const std::string& copy_to) {
  const sdsmi::NoisePath path = sdsmi::read_wns(file);
  const auto& g = path.grid();
  const auto& inc = path.increments();
  double ss = 0.0;
  for (double v : inc) ss += v * v;
  const double cell_var = inc.empty() ? 0.0 : ss / static_cast<double>(inc.size());
  std::printf("%s: nt=%zu ny=%zu dt=%g dy=%g L=%g seed=%llu mean_sq/(dt*dy)=%.4f\n", file.c_str(),
              g.nt, g.ny, g.dt, g.dy(), g.L, static_cast<unsigned long long>(path.seed()),
              cell_var / (g.dt * g.dy()));
  if (!copy_to.empty()) {
    sdsmi::write_wns(path, copy_to);
    std::printf("wrote %s\n", copy_to.c_str());
  }
  return kExitPass;
}

int cmd_validate(const Common& c) {
  const sdsmi::ExperimentConfig cfg = load(c);
  // Building the model and law surfaces hypothesis errors before a run.
  (void)cfg.build();
  if (cfg.experiment != "riccati" && cfg.experiment != "ergodic" && cfg.experiment != "decay" &&
      cfg.experiment != "cross_solver" && cfg.experiment != "linear_case")
    (void)cfg.build_law();
  std::printf("%s ok: experiment=%s digest=%s\n", c.config.c_str(), cfg.experiment.c_str(),
              cfg.digest.c_str());
  return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation lab for superprocesses with dependent spatial motion and immigration"};
  app.require_subcommand(1);
  Common c;
  auto add_common = [&](CLI::App* s, bool need_config) {
    auto* o = s->add_option("--config", c.config, "experiment config (JSON)");
    if (need_config) o->required()->check(CLI::ExistingFile);
    s->add_option("--seed-override", c.seed_override, "replace seeds.master");
  };

  bool fields = false, quiet = false;
  auto* run = app.add_subcommand("run", "run the configured experiment");
  add_common(run, true);
  run->add_option("--out", c.out, "output directory (default: config output.dir)");
  run->add_option("--lanes", c.lanes, "worker threads (0 = all cores)");
  run->add_flag("--fields", fields, "also write noise.wns and field.csv");
  run->add_flag("--quiet", quiet, "no per-row output");

  std::size_t index = 0;
  double horizon = 0.0;
  auto* exp = app.add_subcommand("export-noise", "sample a noise path and write it as .wns");
  add_common(exp, true);
  exp->add_option("--out", c.out, "output file (default noise.wns)");
  exp->add_option("--index", index, "noise seed index");
  exp->add_option("--horizon", horizon, "time horizon (default from params)");

  std::string in_file, copy_to;
  auto* imp = app.add_subcommand("import-noise", "verify a .wns file and print its header");
  imp->add_option("file", in_file, ".wns file")->required();
  imp->add_option("--out", copy_to, "re-export to this file");

  auto* val = app.add_subcommand("validate-config", "check a config without running it");
  add_common(val, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return cmd_run(c, fields, quiet);
    if (*exp) return cmd_export_noise(c, index, horizon);
    if (*imp) return cmd_import_noise(in_file, copy_to);
    if (*val) return cmd_validate(c);
  } catch (const sdsmi::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == sdsmi::ErrorKind::ConfigInvalid ? kExitConfig : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitRuntime;
}
