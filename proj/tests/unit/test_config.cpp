#include <string>

#include "doctest.h"

#include "hydrochain/config.hpp"
#include "hydrochain/error.hpp"

using namespace hydrochain;

TEST_SUITE("config")
{
  TEST_CASE("defaults")
  {
    const auto cfg = parse_config_text("experiment = equilibrium\n");
    CHECK(cfg.beta == 1.0);
    CHECK(cfg.kappa == 0.25);
    CHECK(cfg.N == 128);
    CHECK(cfg.sigma_for(128) == 39.0);
    CHECK(cfg.dt_for(128) == doctest::Approx(0.1 / (128 * 39.0)));
    CHECK(cfg.block_size_for(512) == 64);
    CHECK(cfg.schedule.kind == TensionSchedule::Kind::Constant);
    const auto times = cfg.record_times(1.0);
    CHECK(times.size() == 200);
    CHECK(times.front() == 0.0);
    CHECK(times.back() == 1.0);
  }

  TEST_CASE("schedule kind follows the experiment unless given")
  {
    CHECK(parse_config_text("experiment = ramp\n").schedule.kind == TensionSchedule::Kind::Ramp);
    CHECK(parse_config_text("experiment = shock\n").schedule.kind == TensionSchedule::Kind::Step);
    CHECK(parse_config_text("experiment = ramp\nschedule = constant\n").schedule.kind ==
          TensionSchedule::Kind::Constant);
    CHECK(parse_config_text("N = 64\n", "<x>", "shock").experiment == "shock");
  }

  TEST_CASE("rejected values name the rule")
  {
    CHECK_THROWS_WITH_AS(parse_config_text("experiment = equilibrium\nkappa = 0.4\n"),
                         doctest::Contains("1/3"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config_text("experiment = equilibrium\nN = 128\ndt = 1e-3\n"),
                         doctest::Contains("stability bound"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("experiment = equilibrium\nbeta = -1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("experiment = equilibrium\nwindow_lo = 0.9\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("experiment = nonsense\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("experiment = equilibrium\nN = abc\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("experiment = equilibrium\nsigma_exponent = 0.4\n"), ConfigError);
  }

  TEST_CASE("unknown and duplicate keys report their line")
  {
    CHECK_THROWS_WITH_AS(parse_config_text("experiment = ramp\n# note\nbogus = 1\n", "f.cfg"),
                         doctest::Contains("f.cfg:3"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config_text("experiment = ramp\nN = 64\nN = 128\n", "g.cfg"),
                         doctest::Contains("g.cfg:3"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("experiment = ramp\nN 64\n"), ConfigError);
  }

  TEST_CASE("canonical text round trip")
  {
    const auto cfg = parse_config_text(
        "experiment = convergence_study\nNs = 64, 128\nt_end = 0.1\ntau1 = 0.75\nseed = 12345678901\n"
        "delta1 = 2e-3\n");
    const auto again = parse_config_text(cfg.to_text());
    CHECK(again.to_text() == cfg.to_text());
    CHECK(again.Ns == std::vector<int>{64, 128});
    CHECK(again.t_end == 0.1);
    CHECK(again.seed == 12345678901ull);
    CHECK(again.schedule.tau1 == 0.75);
    CHECK(cfg.to_text().find("0.10000000000000001") == std::string::npos);
  }

  TEST_CASE("derived configs")
  {
    const auto cfg = parse_config_text("experiment = ramp\nN = 64\nt_end = 0.5\nrecord_count = 3\n");
    const auto cc = cfg.chain_config(64, 99);
    CHECK(cc.N == 64);
    CHECK(cc.seed == 99);
    CHECK(cc.sigma == cfg.sigma_for(64));
    CHECK(cc.record_times.size() == 3);
    const auto mc = cfg.macro_config(0.5);
    CHECK(mc.M == cfg.M);
    CHECK(mc.t_end == 0.5);
    CHECK(mc.schedule.tau1 == cfg.schedule.tau1);
  }
}
