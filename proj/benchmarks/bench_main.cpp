#include <vector>

#include <benchmark/benchmark.h>

#include "hydrochain/blockstats.hpp"
#include "hydrochain/chain.hpp"
#include "hydrochain/macro.hpp"
#include "hydrochain/philox.hpp"
#include "hydrochain/thermo.hpp"
#include "hydrochain/thermo_table.hpp"

using namespace hydrochain;

namespace {

const thermo::ThermoModel& model()
{
  static const thermo::ThermoModel m(1.0, {0.25, 0.1});
  return m;
}

const thermo::ThermoTable& table()
{
  static const thermo::ThermoTable t(model());
  return t;
}

void BM_Philox(benchmark::State& state)
{
  const auto key = rng::Philox4x32::key_from_seed(1);
  std::uint32_t n = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(rng::normal_pair({n++, 0, 0, 0}, key));
  }
  state.SetItemsProcessed(2 * state.iterations());
}
BENCHMARK(BM_Philox);

void BM_Moments(benchmark::State& state)
{
  double tau = -1.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(model().moments(tau));
    tau += 1e-3;
    if (tau > 1.0) tau = -1.0;
  }
}
BENCHMARK(BM_Moments);

void BM_TableBuild(benchmark::State& state)
{
  for (auto _ : state) {
    thermo::ThermoTable t(model());
    benchmark::DoNotOptimize(t.rho_max());
  }
}
BENCHMARK(BM_TableBuild)->Unit(benchmark::kMillisecond);

void BM_TableTension(benchmark::State& state)
{
  const auto& t = table();  // built outside the timed loop
  double rho = -2.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(t.tension(rho));
    rho += 1e-4;
    if (rho > 2.0) rho = -2.0;
  }
}
BENCHMARK(BM_TableTension);

void BM_ChainTrajectory(benchmark::State& state)
{
  micro::ChainConfig cfg;
  cfg.N = static_cast<int>(state.range(0));
  cfg.resolve_defaults();
  cfg.t_end = 1000 * cfg.dt;
  const auto init = micro::make_initial_state(cfg, model(), 0.1);
  for (auto _ : state) {
    auto traj = micro::run_trajectory_from(cfg, model(), init);
    benchmark::DoNotOptimize(traj.final_ledger.E);
  }
  state.SetItemsProcessed(state.iterations() * 1000 * cfg.N);
}
BENCHMARK(BM_ChainTrajectory)->Arg(128)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_BrownianBridge(benchmark::State& state)
{
  const micro::BrownianIncrements inc(3, 511, 1e-5, static_cast<int>(state.range(0)));
  std::vector<double> dw, dwt;
  std::uint64_t n = 0;
  for (auto _ : state) {
    inc.generate(n++, dw, dwt);
    benchmark::DoNotOptimize(dw.data());
  }
}
BENCHMARK(BM_BrownianBridge)->Arg(0)->Arg(2);

void BM_HatField(benchmark::State& state)
{
  std::vector<double> u(512);
  rng::NormalStream z(1, 0);
  for (auto& x : u) x = z();
  for (auto _ : state) benchmark::DoNotOptimize(blocks::hat_field(u, 64));
}
BENCHMARK(BM_HatField);

void BM_MacroRhs(benchmark::State& state)
{
  macro::MacroConfig cfg;
  cfg.M = static_cast<int>(state.range(0));
  const auto& t = table();
  macro::MacroState s = macro::equilibrium_state(cfg.M, 0.1);
  for (int j = 0; j < cfg.M; ++j) s.p[j] = 0.01 * j / cfg.M;
  for (auto _ : state) benchmark::DoNotOptimize(macro::viscous_rhs(s, 0.2, cfg, t));
}
BENCHMARK(BM_MacroRhs)->Arg(400);

}  // namespace

BENCHMARK_MAIN();
