#include <cmath>
#include <limits>

#include "doctest.h"

#include "hydrochain/chain.hpp"
#include "hydrochain/error.hpp"

using namespace hydrochain;
using namespace hydrochain::micro;

namespace {

ChainConfig small_config(int N)
{
  ChainConfig cfg;
  cfg.N = N;
  cfg.t_end = 0.01;
  cfg.resolve_defaults();
  return cfg;
}

NoiseIncrements zero_noise(int N)
{
  return {std::vector<double>(N - 1, 0.0), std::vector<double>(N - 1, 0.0)};
}

}  // namespace

TEST_SUITE("chain")
{
  TEST_CASE("defaults")
  {
    CHECK(default_sigma(128) == 39.0);  // 128^0.75 = 38.05
    CHECK(default_sigma(256) == 64.0);
    CHECK(default_sigma(512) == 108.0);
    auto cfg = small_config(128);
    CHECK(cfg.sigma == 39.0);
    CHECK(cfg.dt == doctest::Approx(kDefaultTheta / (128 * 39.0)));
    cfg.refinement = 3;
    CHECK(cfg.fine_dt() == doctest::Approx(cfg.dt / 8));
  }

  TEST_CASE("validation names the rule")
  {
    auto cfg = small_config(64);
    cfg.dt = 0.3 / (64 * cfg.sigma);
    CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("stability bound"), ConfigError);
    cfg = small_config(64);
    cfg.N = 1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = small_config(64);
    cfg.record_times = {0.5};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
  }

  TEST_CASE("deterministic step matches the hand-written drift")
  {
    const thermo::ThermoModel model(1.0, {0.0, 0.1});
    auto cfg = small_config(3);
    cfg.sigma = 2.0;
    cfg.dt = 1e-3;
    cfg.noise = false;
    cfg.schedule = TensionSchedule::constant(0.5);
    ChainState s{{0.1, -0.2, 0.3}, {0.4, 0.0, -0.1}, 0.0};
    const auto out = step(s, cfg, model, zero_noise(3), cfg.dt);
    const double N = 3, v = N * cfg.sigma, dt = cfg.dt;
    const auto& r = s.r;
    const auto& p = s.p;
    // harmonic: V'(r) = r; walls p_0 = 0 on the left and tension 0.5 on the right
    CHECK(out.r[0] == doctest::Approx(r[0] + dt * (N * p[0] + v * (r[1] - r[0]))));
    CHECK(out.r[1] == doctest::Approx(r[1] + dt * (N * (p[1] - p[0]) + v * (r[2] + r[0] - 2 * r[1]))));
    CHECK(out.r[2] == doctest::Approx(r[2] + dt * (N * (p[2] - p[1]) + v * (r[1] - r[2]))));
    CHECK(out.p[0] == doctest::Approx(p[0] + dt * (N * (r[1] - r[0]) + v * (p[1] - p[0]))));
    CHECK(out.p[1] == doctest::Approx(p[1] + dt * (N * (r[2] - r[1]) + v * (p[2] + p[0] - 2 * p[1]))));
    CHECK(out.p[2] == doctest::Approx(p[2] + dt * (N * (0.5 - r[2]) + v * (p[1] - p[2]))));
    CHECK(out.t == doctest::Approx(dt));

    const auto d = drift(s, 0.5, cfg, model);
    for (int k = 0; k < 3; ++k) {
      CHECK(out.r[k] == doctest::Approx(r[k] + dt * d.dr[k]));
      CHECK(out.p[k] == doctest::Approx(p[k] + dt * d.dp[k]));
    }
  }

  TEST_CASE("noise alone conserves total strain and momentum")
  {
    const thermo::ThermoModel model(1.0, {});
    auto cfg = small_config(32);
    cfg.hamiltonian = false;
    cfg.noise_drift = false;
    auto s = make_initial_state(cfg, model, 0.1);
    const BrownianIncrements inc(3, cfg.N - 1, cfg.dt, 0);
    NoiseIncrements noise;
    const double L0 = s.length(), P0 = s.momentum();
    for (int n = 0; n < 100; ++n) {
      inc.generate(n, noise.dw, noise.dwt);
      s = step(s, cfg, model, noise, cfg.dt, n);
    }
    CHECK(s.length() == doctest::Approx(L0).epsilon(1e-13).scale(1.0));
    CHECK(s.momentum() == doctest::Approx(P0).epsilon(1e-13).scale(1.0));
  }

  TEST_CASE("Brownian bridge refinement preserves coarse increments")
  {
    const int bonds = 17;
    const double dt = 1e-3;
    const BrownianIncrements coarse(9, bonds, dt, 0);
    const BrownianIncrements fine(9, bonds, dt, 3);
    CHECK(fine.fine_per_coarse() == 8);
    std::vector<double> cw, cwt, fw, fwt;
    double sum2 = 0.0, sum2_fine = 0.0;
    int count = 0;
    for (std::uint64_t n = 0; n < 200; ++n) {
      coarse.generate(n, cw, cwt);
      fine.generate(n, fw, fwt);
      REQUIRE(cw.size() == bonds);
      REQUIRE(fw.size() == 8 * bonds);
      for (int b = 0; b < bonds; ++b) {
        double s = 0.0, st = 0.0;
        for (int j = 0; j < 8; ++j) {
          s += fw[j * bonds + b];
          st += fwt[j * bonds + b];
          sum2_fine += fw[j * bonds + b] * fw[j * bonds + b];
        }
        CHECK(s == doctest::Approx(cw[b]).epsilon(1e-12).scale(1e-3));
        CHECK(st == doctest::Approx(cwt[b]).epsilon(1e-12).scale(1e-3));
        sum2 += cw[b] * cw[b];
        ++count;
      }
    }
    // Var(dW) = dt on the coarse grid, dt/8 on the fine one
    const double tol = 4 * std::sqrt(2.0 / count);
    CHECK(std::abs(sum2 / count / dt - 1.0) < tol);
    CHECK(std::abs(sum2_fine / (8 * count) / (dt / 8) - 1.0) < tol / std::sqrt(8.0));
  }

  TEST_CASE("deterministic part of the ledger closes to second order")
  {
    const thermo::ThermoModel model(1.0, {0.25, 0.1});
    auto cfg = small_config(16);
    cfg.noise = false;
    cfg.schedule = TensionSchedule::constant(0.3);
    const auto s = make_initial_state(cfg, model, 0.3);
    const auto one_step_defect = [&](double dt) {
      ChainConfig c = cfg;
      c.dt = dt;
      c.t_end = dt;
      c.record_times = {};
      const auto traj = run_trajectory_from(c, model, s);
      return std::abs(traj.final_ledger.first_law_residual());
    };
    const double a = one_step_defect(1e-4);
    const double b = one_step_defect(5e-5);
    CHECK(a > 0.0);
    CHECK(a / b == doctest::Approx(4.0).epsilon(0.05));
  }

  TEST_CASE("trajectories are reproducible per seed")
  {
    const thermo::ThermoModel model(1.0, {});
    auto cfg = small_config(32);
    cfg.t_end = 0.005;
    cfg.record_times = {0.0, 0.0025, 0.005};
    const auto a = run_trajectory(cfg, model, 0.2);
    const auto b = run_trajectory(cfg, model, 0.2);
    cfg.seed = 2;
    const auto c = run_trajectory(cfg, model, 0.2);
    REQUIRE(a.snapshots.size() == 3);
    CHECK(a.snapshots.back().r == b.snapshots.back().r);
    CHECK(a.final_ledger.M_p == b.final_ledger.M_p);
    CHECK(a.snapshots.back().r != c.snapshots.back().r);
    // record times snap to the nearest step
    CHECK(std::abs(a.snapshots[1].t - 0.0025) <= 0.5 * cfg.dt + 1e-15);
    CHECK(a.steps == static_cast<long long>(std::ceil(0.005 / cfg.dt - 1e-9)));
  }

  TEST_CASE("non-finite state raises BlowUpError")
  {
    const thermo::ThermoModel model(1.0, {});
    auto cfg = small_config(4);
    ChainState s{{0.0, std::numeric_limits<double>::infinity(), 0.0, 0.0}, {0.0, 0.0, 0.0, 0.0}, 0.0};
    CHECK_THROWS_AS(step(s, cfg, model, zero_noise(4), cfg.dt, 7), BlowUpError);
    CHECK_THROWS_AS(step(s, cfg, model, zero_noise(3), cfg.dt), ConfigError);
  }
}
