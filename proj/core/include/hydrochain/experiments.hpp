#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "hydrochain/config.hpp"
#include "hydrochain/manifest.hpp"

namespace hydrochain {

struct ExperimentResult
{
  RunManifest manifest;
  std::filesystem::path manifest_path;

  bool passed() const noexcept;
};

/// Runs the preset named by config.experiment, writing CSVs, plot scripts and
/// manifest.json under out_dir. The manifest is written with status "started"
/// before any computation and finalized afterwards; on error it records the
/// failing stage and the exception is rethrown.
ExperimentResult run_experiment(const RunConfig& config, const std::filesystem::path& out_dir);

/// Seeds a run will use, in the order they are listed in the manifest.
std::vector<std::uint64_t> planned_seeds(const RunConfig& config);

struct RerunReport
{
  ExperimentResult result;
  std::vector<std::string> mismatches;  ///< files whose bytes differ, or missing

  bool identical() const noexcept { return mismatches.empty(); }
};

/// Re-executes the configuration stored in a manifest into out_dir and
/// compares every indexed output byte for byte (by FNV-1a and size).
RerunReport rerun_manifest(const std::filesystem::path& manifest, const std::filesystem::path& out_dir);

/// Fast invariant checks: closed-form thermodynamics, RNG known answers,
/// conservation and summation identities, config round trip, PDE balance.
std::vector<CheckResult> self_check();

}  // namespace hydrochain
