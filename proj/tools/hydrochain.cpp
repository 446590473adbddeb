// hydrochain: command-line driver for the chain / p-system experiments.
//
// Exit codes: 0 pass, 1 assertion or trend failure, 2 configuration error,
// 3 numerical blow-up.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"

#include "hydrochain/config.hpp"
#include "hydrochain/error.hpp"
#include "hydrochain/experiments.hpp"
#include "hydrochain/thermo.hpp"
#include "hydrochain/thermo_table.hpp"

namespace {

enum Exit : int { kPass = 0, kFail = 1, kConfig = 2, kBlowUp = 3 };

void print_checks(const std::vector<hydrochain::CheckResult>& checks)
{
  for (const auto& c : checks) {
    fmt::print("{} {:<36} {}\n", c.passed ? "PASS" : "FAIL", c.name, c.detail);
  }
}

int report(const hydrochain::ExperimentResult& r)
{
  print_checks(r.manifest.checks);
  fmt::print("manifest: {}\n", r.manifest_path.string());
  return r.passed() ? kPass : kFail;
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"hydrochain: anharmonic chain, viscous p-system and thermodynamic ledger"};
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error, off")->capture_default_str();

  std::string preset, config_path, out_dir = "runs";
  std::optional<std::uint64_t> seed;
  std::optional<int> replicas;
  auto* run = app.add_subcommand("run", "run an experiment preset");
  run->add_option("preset", preset, "equilibrium | ramp | quasistatic_sweep | shock | convergence_study | block_scaling")
      ->required();
  run->add_option("--config", config_path, "key = value configuration file")->required();
  run->add_option("--seed", seed, "override the base seed");
  run->add_option("--out", out_dir, "output directory")->capture_default_str();
  run->add_option("--replicas", replicas, "override the replica count");

  std::string table_config, table_out;
  auto* table = app.add_subcommand("thermo-table", "tabulate tau, F, U and tau derivatives on a strain grid");
  table->add_option("--config", table_config, "configuration file (thermo keys are used)")->required();
  table->add_option("--out", table_out, "CSV path (default: stdout)");

  auto* check = app.add_subcommand("check", "run the invariant self-test suite");

  std::string manifest_path, rerun_out;
  auto* rerun = app.add_subcommand("rerun", "re-execute a manifest and compare outputs byte for byte");
  rerun->add_option("manifest", manifest_path, "manifest.json of a previous run")->required();
  rerun->add_option("--out", rerun_out, "output directory (default: <run>/rerun)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kConfig;
  }
  // stdout carries data (thermo-table, check report); logs go to stderr
  spdlog::set_default_logger(spdlog::stderr_color_mt("hydrochain"));
  spdlog::set_level(spdlog::level::from_str(log_level));
  spdlog::set_pattern("[%H:%M:%S.%e] [%^%l%$] %v");

  try {
    if (*run) {
      auto cfg = hydrochain::parse_config(config_path, preset);
      if (cfg.experiment != preset) {
        throw hydrochain::ConfigError(
            fmt::format("preset '{}' does not match experiment = {} in {}", preset, cfg.experiment, config_path));
      }
      if (seed) cfg.seed = *seed;
      if (replicas) cfg.replicas = *replicas;
      cfg.validate();
      return report(hydrochain::run_experiment(cfg, out_dir));
    }
    if (*table) {
      const auto cfg = hydrochain::parse_config(table_config);
      const hydrochain::thermo::ThermoModel model(cfg.beta, cfg.potential());
      const auto rows = hydrochain::thermo::thermo_table_rows(model, cfg.rho_min, cfg.rho_max, cfg.rho_step);
      if (table_out.empty()) {
        hydrochain::thermo::write_thermo_table_csv(std::cout, rows);
      } else {
        std::ofstream out(table_out);
        if (!out) throw hydrochain::ConfigError(fmt::format("cannot write '{}'", table_out));
        hydrochain::thermo::write_thermo_table_csv(out, rows);
      }
      return kPass;
    }
    if (*check) {
      const auto checks = hydrochain::self_check();
      print_checks(checks);
      for (const auto& c : checks) {
        if (!c.passed) return kFail;
      }
      return kPass;
    }
    if (*rerun) {
      const std::filesystem::path manifest(manifest_path);
      const auto dir = rerun_out.empty() ? manifest.parent_path() / "rerun" : std::filesystem::path(rerun_out);
      const auto rep = hydrochain::rerun_manifest(manifest, dir);
      for (const auto& m : rep.mismatches) fmt::print("MISMATCH {}\n", m);
      fmt::print("{} outputs compared: {}\n", rep.result.manifest.outputs.size(),
                 rep.identical() ? "bit-identical" : "DIFFERENT");
      return rep.identical() ? kPass : kFail;
    }
  } catch (const hydrochain::ConfigError& e) {
    spdlog::error("configuration error: {}", e.what());
    return kConfig;
  } catch (const hydrochain::BlowUpError& e) {
    spdlog::error("numerical blow-up: {}", e.what());
    return kBlowUp;
  } catch (const hydrochain::NumericalError& e) {
    spdlog::error("numerical failure: {}", e.what());
    return kBlowUp;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kFail;
  }
  return kPass;
}
