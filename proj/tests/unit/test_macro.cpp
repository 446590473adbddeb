#include <algorithm>
#include <cmath>

#include "doctest.h"

#include "hydrochain/error.hpp"
#include "hydrochain/macro.hpp"

using namespace hydrochain;
using namespace hydrochain::macro;

namespace {

const thermo::ThermoTable& table_for(double kappa)
{
  static const thermo::ThermoModel harmonic(1.0, {0.0, 0.1});
  static const thermo::ThermoModel anharmonic(1.0, {0.25, 0.1});
  static const thermo::ThermoTable th(harmonic);
  static const thermo::ThermoTable ta(anharmonic);
  return kappa == 0.0 ? th : ta;
}

}  // namespace

TEST_SUITE("macro")
{
  TEST_CASE("equilibrium is a steady state")
  {
    const auto& table = table_for(0.25);
    const double rho = 0.7;
    const double tau = table.tension(rho);
    MacroConfig cfg;
    cfg.M = 64;
    cfg.schedule = TensionSchedule::constant(tau);
    const auto s = equilibrium_state(cfg.M, rho);
    const auto rhs = viscous_rhs(s, tau, cfg, table);
    for (int j = 0; j < cfg.M; ++j) {
      CHECK(std::abs(rhs.dr[j]) < 1e-9);
      CHECK(std::abs(rhs.dp[j]) < 1e-9);
    }
    cfg.record_times = {0.5};
    const auto traj = advance(s, cfg, table, 0.5);
    REQUIRE(traj.snapshots.size() == 1);
    for (double r : traj.final_state.r) CHECK(r == doctest::Approx(rho).epsilon(1e-9));
    CHECK(traj.final.work == doctest::Approx(0.0).scale(1.0));
    CHECK(traj.final.dissipation < 1e-15);
  }

  TEST_CASE("boundary ghosts")
  {
    const auto& table = table_for(0.25);
    MacroState s{{0.1, 0.2, 0.3, 0.4}, {0.5, 0.1, -0.1, 0.3}, 0.0};
    const auto g = apply_bcs(s, 0.8, table);
    // wall: p vanishes on the left face; tension is held on the right face
    CHECK(0.5 * (g.p_left + s.p[0]) == doctest::Approx(0.0).scale(1.0));
    CHECK(0.5 * (g.tau_right + table.tension(0.4)) == doctest::Approx(0.8));
    CHECK(g.p_right == s.p[3]);
    CHECK(g.tau_left == doctest::Approx(table.tension(0.1)));
  }

  TEST_CASE("harmonic ramp matches d'Alembert")
  {
    // kappa = 0: tau = r and, until the wave reaches the wall, the inviscid
    // solution is the left-moving r = p = tau_bar(t + x - 1).
    const auto& table = table_for(0.0);
    MacroConfig cfg;
    cfg.M = 400;
    cfg.delta1 = cfg.delta2 = 1e-5;
    cfg.schedule = TensionSchedule::ramp(0.0, 1.0, 1.0);
    cfg.t_end = 0.5;
    cfg.record_times = {0.5};
    const auto traj = advance(equilibrium_state(cfg.M, 0.0), cfg, table, 0.5);
    const auto& s = traj.final_state;
    double err_r = 0.0, err_p = 0.0;
    for (int j = 0; j < cfg.M; ++j) {
      const double exact = cfg.schedule(0.5 + s.x(j) - 1.0);
      err_r += std::abs(s.r[j] - exact) / cfg.M;
      err_p += std::abs(s.p[j] - exact) / cfg.M;
    }
    CHECK(err_r < 1e-3);
    CHECK(err_p < 1e-3);
        // dL/dt = p(1) = tau_bar(t), and the smoothstep ramp integrates to t^3 - t^4 / 2
    CHECK(traj.final.length == doctest::Approx(0.125 - 0.03125).epsilon(1e-3));
  }

  TEST_CASE("energy balance closes and converges under refinement")
  {
    const auto& table = table_for(0.25);
    const auto run = [&](int M) {
      MacroConfig cfg;
      cfg.M = M;
      cfg.delta1 = cfg.delta2 = 1e-2;
      cfg.schedule = TensionSchedule::ramp(0.0, 0.5, 0.3);
      cfg.t_end = 0.5;
      cfg.record_times = {0.25, 0.5};
      return advance(equilibrium_state(M, 0.0), cfg, table, 0.5);
    };
    const auto a = run(50);
    const auto b = run(100);
    CHECK(a.dissipation_monotone);
    CHECK(b.dissipation_monotone);
    CHECK(a.max_residual / b.max_residual > 3.0);
    CHECK(b.final.residual ==
          doctest::Approx(std::abs(b.final.free_energy - b.initial_free_energy - b.final.work + b.final.dissipation))
              .epsilon(1e-9)
              .scale(1e-12));
    const auto wd = work_and_dissipation(b);
    REQUIRE(wd.t.size() == 2);
    CHECK(wd.work.back() == b.final.work);
  }

  TEST_CASE("Clausius gap bounds the dissipation")
  {
    const auto& table = table_for(0.25);
    MacroConfig cfg;
    cfg.M = 100;
    cfg.delta1 = cfg.delta2 = 1e-2;
    cfg.schedule = TensionSchedule::ramp(0.0, 0.5, 0.5);
    cfg.t_end = 3.0;
    cfg.record_times = {3.0};
    const auto traj = advance(equilibrium_state(cfg.M, table.strain_of_tension(0.0)), cfg, table, 3.0);
    const auto c = clausius_gap(traj, table, 0.0, 0.5);
    CHECK(c.gap >= c.dissipation - 1e-6);
    CHECK(c.gap > 0.0);
    CHECK(c.delta_free == doctest::Approx(table.free_energy(table.strain_of_tension(0.5)) - table.free_energy(table.strain_of_tension(0.0))));
  }

  TEST_CASE("entropy pair derivatives")
  {
    const auto& table = table_for(0.25);
    const double e = 1e-6;
    for (double r : {-0.5, 0.0, 0.05, 1.2}) {
      for (double p : {-0.3, 0.4}) {
        const auto ep = entropy_pair(r, p, table);
        CHECK(ep.eta_r == doctest::Approx((entropy_pair(r + e, p, table).eta - entropy_pair(r - e, p, table).eta) / (2 * e)).epsilon(1e-6));
        CHECK(ep.eta_p == doctest::Approx((entropy_pair(r, p + e, table).eta - entropy_pair(r, p - e, table).eta) / (2 * e)).epsilon(1e-6));
        CHECK(ep.q_r == doctest::Approx((entropy_pair(r + e, p, table).q - entropy_pair(r - e, p, table).q) / (2 * e)).epsilon(1e-5));
        CHECK(ep.q_p == doctest::Approx((entropy_pair(r, p + e, table).q - entropy_pair(r, p - e, table).q) / (2 * e)).epsilon(1e-6));
      }
    }
  }

  TEST_CASE("entropy residual of a steady state and support checks")
  {
    const auto& table = table_for(0.25);
    std::vector<blocks::Profile> series;
    for (int k = 0; k <= 50; ++k) {
      series.push_back(to_profile(MacroState{std::vector<double>(100, 0.3), std::vector<double>(100, 0.0), 0.02 * k}));
    }
    const auto phi = bump_product(0.2, 0.8, 0.2, 0.8);
    CHECK(std::abs(entropy_pair_residual(series, table, phi)) < 1e-6);
    CHECK_THROWS_AS(entropy_pair_residual(series, table, bump_product(0.2, 0.8, 0.0, 0.8)), ConfigError);
    CHECK_THROWS_AS(entropy_pair_residual(series, table, bump_sine(0.2, 0.8, 0.2, 0.8, 4)), ConfigError);
  }

  TEST_CASE("profiles and interpolation")
  {
    const MacroState s{{1.0, 2.0, 4.0, 8.0}, {0, 0, 0, 0}, 0.3};
    const auto prof = to_profile(s);
    CHECK(prof.x0 == 0.125);
    CHECK(prof.dx == 0.25);
    CHECK(interpolate(s.r, 0.125) == 1.0);
    CHECK(interpolate(s.r, 0.25) == doctest::Approx(1.5));
    CHECK(interpolate(s.r, 0.0) == 1.0);
    CHECK(interpolate(s.r, 1.0) == 8.0);
  }

  TEST_CASE("configuration checks")
  {
    MacroConfig cfg;
    cfg.M = 2;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = MacroConfig{};
    cfg.cfl = 1.5;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = MacroConfig{};
    cfg.delta1 = -1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = MacroConfig{};
    CHECK(cfg.max_dt() <= cfg.cfl * cfg.dx());
  }
}
