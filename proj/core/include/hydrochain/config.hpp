#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "hydrochain/chain.hpp"
#include "hydrochain/macro.hpp"
#include "hydrochain/potential.hpp"
#include "hydrochain/schedule.hpp"

namespace hydrochain {

/// Fully resolved run configuration. Text form: one `key = value` per line,
/// `#` starts a comment, lists are comma separated.
struct RunConfig
{
  std::string experiment;

  // thermo
  double beta = 1.0;
  double kappa = 0.25;
  double moll_width = 0.1;
  double table_tau_min = -12.0;
  double table_tau_max = 12.0;
  double table_step = 0.01;
  double rho_min = -5.0;
  double rho_max = 5.0;
  double rho_step = 0.05;

  // microchain
  int N = 128;
  std::vector<int> Ns{128, 256, 512};
  double sigma = 0.0;  ///< 0: ceil(N^sigma_exponent)
  double sigma_exponent = 0.75;
  double theta = micro::kDefaultTheta;
  double dt = 0.0;  ///< 0: theta / (N sigma)
  double t_end = 0.1;
  int refinement = 0;
  /// Kind defaults per experiment (ramp for ramp/quasistatic_sweep/convergence_study,
  /// step for shock, constant otherwise) unless `schedule` is given.
  TensionSchedule schedule{TensionSchedule::Kind::Constant, 0.0, 0.5, 1.0, 0.0};
  std::uint64_t seed = 1;
  int replicas = 16;
  int record_count = 200;
  bool write_snapshots = true;

  // blockstats
  int l = 0;  ///< 0: ceil(N^l_exponent)
  double l_exponent = 2.0 / 3.0;
  std::vector<int> ls{8, 16, 32};

  // macropde
  int M = 400;
  double cfl = 0.4;
  double delta1 = 1e-3;
  double delta2 = 1e-3;
  std::vector<double> ramp_times{0.5, 1.0, 2.0, 4.0};
  double settle_time = 2.0;

  // harness
  double window_lo = 0.2;
  double window_hi = 0.8;
  int threads = 0;  ///< 0: hardware concurrency

  thermo::PotentialParams potential() const noexcept { return {kappa, moll_width}; }
  double sigma_for(int n) const;
  double dt_for(int n) const;
  int block_size_for(int n) const;
  /// record_count equispaced times on [0, horizon], both ends included.
  std::vector<double> record_times(double horizon) const;
  micro::ChainConfig chain_config(int n, std::uint64_t replica_seed) const;
  macro::MacroConfig macro_config(double horizon) const;

  /// Throws ConfigError naming the violated rule.
  void validate() const;

  /// Canonical text; parse_config_text(to_text()) reproduces *this.
  std::string to_text() const;
};

/// Presets understood by run_experiment.
const std::vector<std::string>& experiment_names();

/// Parses and validates; errors carry `source:line`. `default_experiment`
/// applies when the text has no `experiment` key.
RunConfig parse_config_text(std::string_view text, std::string_view source = "<config>",
                            std::string_view default_experiment = {});
RunConfig parse_config(const std::filesystem::path& path, std::string_view default_experiment = {});

}  // namespace hydrochain
