#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "hydrochain/blockstats.hpp"
#include "hydrochain/chain.hpp"
#include "hydrochain/config.hpp"
#include "hydrochain/experiments.hpp"
#include "hydrochain/macro.hpp"
#include "hydrochain/philox.hpp"
#include "hydrochain/thermo.hpp"
#include "hydrochain/thermo_table.hpp"

namespace hydrochain {

namespace {

CheckResult harmonic_thermo()
{
  const thermo::ThermoModel model(1.0, {0.0, 0.1});
  double worst = 0.0;
  for (double tau : {-2.0, -0.5, 0.0, 0.3, 1.7}) {
    const double G = 0.5 * std::log(2.0 * std::numbers::pi) + 0.5 * tau * tau;
    worst = std::max(worst, std::abs(model.log_partition(tau) - G));
    worst = std::max(worst, std::abs(model.tension_of_strain(tau) - tau));
    worst = std::max(worst, std::abs(model.free_energy(tau) - (0.5 * tau * tau - 0.5 * std::log(2.0 * std::numbers::pi))));
    worst = std::max(worst, std::abs(model.internal_energy(tau) - (1.0 + 0.5 * tau * tau)));
  }
  return {"harmonic_thermodynamics", worst < 1e-8, fmt::format("max error {:.2e}", worst)};
}

CheckResult philox_known_answers()
{
  using rng::Philox4x32;
  struct Vec
  {
    Philox4x32::Counter ctr;
    Philox4x32::Key key;
    Philox4x32::Counter expect;
  };
  const Vec vectors[] = {
      {{0, 0, 0, 0}, {0, 0}, {0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}},
      {{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
       {0xffffffff, 0xffffffff},
       {0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}},
      {{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
       {0xa4093822, 0x299f31d0},
       {0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}}};
  int bad = 0;
  for (const auto& v : vectors) bad += Philox4x32::apply(v.ctr, v.key) != v.expect;
  return {"philox_known_answers", bad == 0, fmt::format("{} of 3 vectors wrong", bad)};
}

CheckResult noise_conservation()
{
  const thermo::ThermoModel model(1.0, {});
  micro::ChainConfig cfg;
  cfg.N = 64;
  cfg.resolve_defaults();
  cfg.hamiltonian = false;
  cfg.noise_drift = false;
  auto state = micro::make_initial_state(cfg, model, 0.2);
  const micro::BrownianIncrements inc(cfg.seed, cfg.N - 1, cfg.dt, 0);
  micro::NoiseIncrements noise;
  double worst = 0.0;
  for (int n = 0; n < 50; ++n) {
    inc.generate(static_cast<std::uint64_t>(n), noise.dw, noise.dwt);
    const double sp = state.momentum() * cfg.N;
    const double sr = state.length() * cfg.N;
    state = micro::step(state, cfg, model, noise, cfg.dt, n);
    double scale_p = 0.0, scale_r = 0.0;
    for (int i = 0; i < cfg.N; ++i) {
      scale_p += std::abs(state.p[i]);
      scale_r += std::abs(state.r[i]);
    }
    worst = std::max(worst, std::abs(state.momentum() * cfg.N - sp) / scale_p);
    worst = std::max(worst, std::abs(state.length() * cfg.N - sr) / scale_r);
  }
  return {"noise_conservation", worst < 1e-12, fmt::format("max relative drift {:.2e}", worst)};
}

CheckResult block_identity()
{
  std::vector<double> u(200);
  rng::NormalStream normals(7, 0);
  for (auto& x : u) x = 3.0 + normals();
  double worst = 0.0, scale = 0.0;
  for (double x : u) scale = std::max(scale, std::abs(x));
  for (int l : {1, 3, 8, 20}) {
    for (int i = l; i + l <= static_cast<int>(u.size()); ++i) worst = std::max(worst, blocks::etahat_identity_gap(u, l, i));
  }
  return {"block_average_identity", worst <= 1e-12 * scale, fmt::format("max gap {:.2e}", worst)};
}

CheckResult entropy_identities()
{
  const thermo::ThermoModel model(1.0, {});
  const thermo::ThermoTable table(model);
  rng::NormalStream normals(11, 0);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double r = 1.5 * normals();
    const double p = normals();
    const auto e = macro::entropy_pair(r, p, table);
    // grad q = grad eta . Df with flux f(r, p) = (-p, -tau(r))
    worst = std::max(worst, std::abs(e.q_r + e.eta_p * table.tension_slope(r)));
    worst = std::max(worst, std::abs(e.q_p + e.eta_r));
  }
  return {"entropy_pair_identities", worst == 0.0, fmt::format("max defect {:.2e}", worst)};
}

CheckResult config_round_trip()
{
  const auto cfg = parse_config_text("experiment = ramp\nN = 256\ntau1 = 0.75\nls = 4, 8\n", "<check>");
  const auto again = parse_config_text(cfg.to_text(), "<check>");
  const bool ok = again.to_text() == cfg.to_text();
  return {"config_round_trip", ok, ok ? "canonical text stable" : "canonical text changed"};
}

CheckResult macro_balance()
{
  const thermo::ThermoModel model(1.0, {});
  const thermo::ThermoTable table(model);
  macro::MacroConfig cfg;
  cfg.M = 100;
  cfg.schedule = TensionSchedule::ramp(0.0, 0.5, 0.2);
  cfg.record_times = {0.3};
  const auto traj = macro::advance(macro::equilibrium_state(cfg.M, 0.0), cfg, table, 0.3);
  const bool ok = traj.max_residual < 1e-5 && traj.dissipation_monotone;
  return {"pde_energy_balance", ok, fmt::format("max residual {:.2e}", traj.max_residual)};
}

}  // namespace

std::vector<CheckResult> self_check()
{
  std::vector<CheckResult> out;
  for (auto fn : {harmonic_thermo, philox_known_answers, noise_conservation, block_identity, entropy_identities,
                  config_round_trip, macro_balance}) {
    try {
      out.push_back(fn());
    } catch (const std::exception& e) {
      out.push_back({"exception", false, e.what()});
    }
  }
  return out;
}

}  // namespace hydrochain
