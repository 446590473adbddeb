#include <filesystem>

#include "doctest.h"

#include "hydrochain/config.hpp"
#include "hydrochain/error.hpp"
#include "hydrochain/experiments.hpp"

using namespace hydrochain;
namespace fs = std::filesystem;

TEST_SUITE("experiments")
{
  TEST_CASE("self check passes")
  {
    for (const auto& c : self_check()) {
      CAPTURE(c.detail);
      CHECK_MESSAGE(c.passed, c.name);
    }
  }

  TEST_CASE("tiny equilibrium run and bit-exact rerun")
  {
    const fs::path dir = fs::temp_directory_path() / "hydrochain_exp_test";
    fs::remove_all(dir);
    const auto cfg = parse_config_text(
        "experiment = equilibrium\nN = 32\nt_end = 0.01\nreplicas = 3\nrecord_count = 5\nthreads = 1\n");
    const auto res = run_experiment(cfg, dir / "run");
    CHECK(fs::exists(res.manifest_path));
    CHECK(res.manifest.status != "started");
    CHECK(res.manifest.seeds == planned_seeds(cfg));
    CHECK_FALSE(res.manifest.outputs.empty());
    const auto again = rerun_manifest(res.manifest_path, dir / "rerun");
    for (const auto& m : again.mismatches) MESSAGE(m);
    CHECK(again.identical());
    CHECK_THROWS_AS(rerun_manifest(res.manifest_path, dir / "run"), ConfigError);
    fs::remove_all(dir);
  }

  TEST_CASE("unknown experiment is a configuration error")
  {
    RunConfig cfg;
    cfg.experiment = "nope";
    CHECK_THROWS_AS(run_experiment(cfg, fs::temp_directory_path() / "hydrochain_nope"), ConfigError);
  }
}
