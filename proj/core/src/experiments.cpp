#include "hydrochain/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "json.hpp"

#include "hydrochain/blockstats.hpp"
#include "hydrochain/compare.hpp"
#include "hydrochain/csv.hpp"
#include "hydrochain/ensemble.hpp"
#include "hydrochain/error.hpp"
#include "hydrochain/macro.hpp"
#include "hydrochain/philox.hpp"
#include "hydrochain/stats.hpp"
#include "hydrochain/thermo_table.hpp"

namespace hydrochain {

namespace {

using ensemble::Scalars;
using nlohmann::json;

/// Seed family for one chain length in the multi-N presets.
std::uint64_t size_seed(std::uint64_t base, int N)
{
  return rng::mix_seed(base, 0x100000000ull + static_cast<std::uint64_t>(N));
}

/// Runs f, prefixing any error with the stage name; the exception type is kept
/// so the caller can still map it to an exit code.
template <class F>
auto stage(std::string_view name, F&& f) -> decltype(f())
{
  try {
    return f();
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("stage '{}': {}", name, e.what()));
  } catch (const BlowUpError& e) {
    throw BlowUpError(fmt::format("stage '{}': {}", name, e.what()), e.step(), e.time());
  } catch (const NumericalError& e) {
    throw NumericalError(fmt::format("stage '{}': {}", name, e.what()));
  } catch (const DomainError& e) {
    throw DomainError(fmt::format("stage '{}': {}", name, e.what()));
  } catch (const Error& e) {
    throw Error(fmt::format("stage '{}': {}", name, e.what()));
  }
}

struct Context
{
  const RunConfig& cfg;
  thermo::ThermoModel model;
  thermo::ThermoTable table;
  OutputDir out;
  RunManifest& manifest;

  Context(const RunConfig& c, const std::filesystem::path& dir, RunManifest& m)
      : cfg(c),
        model(c.beta, c.potential()),
        table(model, c.table_tau_min, c.table_tau_max, c.table_step),
        out(dir),
        manifest(m)
  {
  }

  void check(std::string name, bool passed, std::string detail)
  {
    spdlog::info("check {:<40} {} ({})", name, passed ? "PASS" : "FAIL", detail);
    manifest.checks.push_back({std::move(name), passed, std::move(detail)});
  }

  void add_steps(const std::string& key, long long n)
  {
    for (auto& [k, v] : manifest.step_counts) {
      if (k == key) {
        v += n;
        return;
      }
    }
    manifest.step_counts.emplace_back(key, n);
  }

  /// Records replica failures; throws when fewer than `needed` survived.
  template <class T>
  void settle(const ensemble::Result<T>& res, int needed, std::string_view what)
  {
    for (const auto& f : res.failures) {
      const auto msg = fmt::format("{} replica {} failed: {}", what, f.replica, f.message);
      spdlog::warn("{}", msg);
      manifest.warnings.push_back(msg);
    }
    if (res.survivors() >= needed) return;
    const auto msg = fmt::format("{}: only {} of {} replicas survived (need {})", what, res.survivors(),
                                 res.replicas.size(), needed);
    if (res.all_blew_up()) throw BlowUpError(msg, -1, 0.0);
    throw NumericalError(msg);
  }

  void write_text(const std::string& file, std::string_view text) { out.write(file, text); }
};

std::size_t count_rows(const std::string& text)
{
  const auto lines = static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
  return lines > 0 ? lines - 1 : 0;
}

void write_csv_text(Context& ctx, const std::string& file, const std::string& text)
{
  ctx.out.write(file, text, count_rows(text));
}

template <class Fn>
std::string to_csv(Fn&& fn)
{
  std::ostringstream os;
  fn(os);
  return os.str();
}

double mean_force(const micro::ChainState& s, const thermo::PotentialParams& pot)
{
  double acc = 0.0;
  for (double r : s.r) acc += thermo::potential_force(pot, r);
  return acc / s.size();
}

std::string summary_csv(const std::vector<ensemble::Aggregate>& aggs)
{
  return to_csv([&](std::ostream& os) {
    csv::Writer w(os, {"statistic", "mean", "se", "n"});
    for (const auto& a : aggs) w.row(a.name, a.value.mean, a.value.se, a.value.n);
  });
}

std::string plot_script(std::string_view title, std::string_view csv_file, std::string_view x,
                        std::initializer_list<std::string_view> ys, std::string_view group = {})
{
  std::string y_list;
  for (auto y : ys) y_list += fmt::format("{}\"{}\"", y_list.empty() ? "" : ", ", y);
  return fmt::format(R"(#!/usr/bin/env python3
# {title}
import csv
import sys
from collections import defaultdict

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

with open("{csv}") as fh:
    rows = list(csv.DictReader(fh))
group = "{group}"
ys = [{ys}]
fig, axes = plt.subplots(len(ys), 1, figsize=(7, 2.6 * len(ys)), squeeze=False)
for ax, y in zip(axes[:, 0], ys):
    series = defaultdict(list)
    for row in rows:
        series[row[group] if group else ""].append((float(row["{x}"]), float(row[y])))
    for key, pts in sorted(series.items()):
        pts.sort()
        ax.plot([p[0] for p in pts], [p[1] for p in pts], label=(f"{{group}}={{key}}" if group else None))
    ax.set_xlabel("{x}")
    ax.set_ylabel(y)
    if group:
        ax.legend(fontsize="small")
fig.suptitle("{title}")
fig.tight_layout()
fig.savefig(sys.argv[1] if len(sys.argv) > 1 else "{stem}.png", dpi=120)
)",
                     fmt::arg("title", title), fmt::arg("csv", csv_file), fmt::arg("x", x), fmt::arg("ys", y_list),
                     fmt::arg("group", group),
                     fmt::arg("stem", std::string(csv_file.substr(0, csv_file.rfind('.')))));
}

void require_replicas(const RunConfig& cfg, int needed)
{
  if (cfg.replicas < needed) {
    throw ConfigError(fmt::format("experiment '{}' needs replicas >= {} for error bars (got {})", cfg.experiment,
                                  needed, cfg.replicas));
  }
}

// ---------------------------------------------------------------- equilibrium

void run_equilibrium(Context& ctx)
{
  const auto& cfg = ctx.cfg;
  if (cfg.schedule.kind != TensionSchedule::Kind::Constant) {
    throw ConfigError("equilibrium needs schedule = constant");
  }
  require_replicas(cfg, 2);
  const double tau = cfg.schedule.tau0;
  const double rho = ctx.model.mean_strain(tau);

  struct Replica
  {
    Scalars scalars;
    std::vector<std::array<double, 4>> series;  // t, L, P, force
    micro::Trajectory traj;                      // kept for replica 0 only
    long long steps;
  };

  const auto res = stage("micro ensemble", [&] {
    return ensemble::run<Replica>(cfg.replicas, cfg.threads, [&](int k) {
      const auto chain = cfg.chain_config(cfg.N, ensemble::replica_seed(cfg.seed, k));
      auto traj = micro::run_trajectory(chain, ctx.model, tau);
      Replica rep;
      std::vector<double> t, L, P, F;
      for (const auto& s : traj.snapshots) {
        t.push_back(s.t);
        L.push_back(s.length());
        P.push_back(s.momentum());
        F.push_back(mean_force(s, cfg.potential()));
        rep.series.push_back({s.t, L.back(), P.back(), F.back()});
      }
      rep.scalars = {{"mean_r", stats::time_average(t, L)},
                     {"mean_p", stats::time_average(t, P)},
                     {"mean_force", stats::time_average(t, F)},
                     {"first_law_residual", traj.final_ledger.first_law_residual()}};
      rep.steps = traj.steps;
      if (k == 0) rep.traj = std::move(traj);
      return rep;
    });
  });
  ctx.settle(res, 2, "equilibrium");

  const auto aggs = ensemble::aggregate([&] {
    std::vector<std::optional<Scalars>> v;
    for (const auto& r : res.replicas) v.push_back(r ? std::optional<Scalars>(r->scalars) : std::nullopt);
    return v;
  }());

  for (const auto& r : res.replicas) {
    if (r) ctx.add_steps("micro", r->steps);
  }
  write_csv_text(ctx, "series.csv", to_csv([&](std::ostream& os) {
                   csv::Writer w(os, {"replica", "t", "L", "P", "mean_force"});
                   for (std::size_t k = 0; k < res.replicas.size(); ++k) {
                     if (!res.replicas[k]) continue;
                     for (const auto& s : res.replicas[k]->series) w.row(static_cast<int>(k), s[0], s[1], s[2], s[3]);
                   }
                 }));
  write_csv_text(ctx, "summary.csv", summary_csv(aggs));
  if (res.replicas[0]) {
    write_csv_text(ctx, "ledger_r0.csv", to_csv([&](std::ostream& os) {
                     csv::write_ledger(os, res.replicas[0]->traj.ledger);
                   }));
    if (cfg.write_snapshots) {
      write_csv_text(ctx, "snapshots_r0.csv", to_csv([&](std::ostream& os) {
                       csv::write_snapshots(os, res.replicas[0]->traj.snapshots);
                     }));
    }
  }
  ctx.write_text("plot_series.py",
                 plot_script("equilibrium time series", "series.csv", "t", {"L", "P", "mean_force"}, "replica"));

  const std::array<std::pair<const char*, double>, 3> targets{
      {{"mean_r", rho}, {"mean_p", 0.0}, {"mean_force", tau}}};
  for (const auto& [name, target] : targets) {
    const auto& a = ensemble::find(aggs, name).value;
    ctx.check(fmt::format("stationarity_{}", name), stats::within(a, target, 3.0),
              fmt::format("mean {:.6g} target {:.6g} se {:.3g} ({:.2f} se)", a.mean, target, a.se,
                          a.se > 0 ? (a.mean - target) / a.se : 0.0));
  }
}

// ----------------------------------------------------------------------- ramp

void run_ramp(Context& ctx)
{
  const auto& cfg = ctx.cfg;
  if (cfg.schedule.kind == TensionSchedule::Kind::Constant) {
    throw ConfigError("ramp needs schedule = ramp or step");
  }
  const double tau0 = cfg.schedule.tau0;
  const double tau1 = cfg.schedule.final_tension();

  struct Replica
  {
    micro::Ledger final;
    double length0;
    double length1;
    micro::Trajectory traj;
    long long steps;
  };

  const auto res = stage("micro ensemble", [&] {
    return ensemble::run<Replica>(cfg.replicas, cfg.threads, [&](int k) {
      const auto chain = cfg.chain_config(cfg.N, ensemble::replica_seed(cfg.seed, k));
      auto traj = micro::run_trajectory(chain, ctx.model, tau0);
      Replica rep{traj.final_ledger, traj.snapshots.front().length(), traj.snapshots.back().length(), {},
                  traj.steps};
      if (k == 0) rep.traj = std::move(traj);
      return rep;
    });
  });
  ctx.settle(res, 1, "ramp");

  const double rho1 = ctx.model.mean_strain(tau1);
  const double dF = ctx.model.free_energy(rho1) - ctx.model.free_energy(ctx.model.mean_strain(tau0));
  std::vector<std::optional<Scalars>> scalars;
  for (const auto& r : res.replicas) {
    if (!r) {
      scalars.emplace_back();
      continue;
    }
    ctx.add_steps("micro", r->steps);
    const auto& l = r->final;
    scalars.push_back(Scalars{{"delta_E", l.E - l.E0},
                              {"W", l.W},
                              {"Q", l.heat()},
                              {"Q_p", l.Q_p},
                              {"Q_r", l.Q_r},
                              {"M_p", l.M_p},
                              {"M_r", l.M_r},
                              {"first_law_residual", l.first_law_residual()},
                              {"delta_L", r->length1 - r->length0},
                              {"clausius_gap", l.W + tau1 * (rho1 - r->length1) - dF}});
  }
  const auto aggs = ensemble::aggregate(scalars);

  write_csv_text(ctx, "ledger_final.csv", to_csv([&](std::ostream& os) {
                   csv::Writer w(os, {"replica", "seed", "E", "W", "Q_p", "Q_r", "M_p", "M_r",
                                      "first_law_residual"});
                   for (std::size_t k = 0; k < res.replicas.size(); ++k) {
                     if (!res.replicas[k]) continue;
                     const auto& l = res.replicas[k]->final;
                     w.row(static_cast<int>(k), ensemble::replica_seed(cfg.seed, static_cast<int>(k)), l.E, l.W,
                           l.Q_p, l.Q_r, l.M_p, l.M_r, l.first_law_residual());
                   }
                 }));
  write_csv_text(ctx, "summary.csv", summary_csv(aggs));

  std::size_t ledger_rows = 0;
  if (res.replicas[0]) {
    const auto text = to_csv([&](std::ostream& os) { csv::write_ledger(os, res.replicas[0]->traj.ledger); });
    ledger_rows = count_rows(text);
    write_csv_text(ctx, "ledger_r0.csv", text);
    if (cfg.write_snapshots) {
      write_csv_text(ctx, "snapshots_r0.csv", to_csv([&](std::ostream& os) {
                       csv::write_snapshots(os, res.replicas[0]->traj.snapshots);
                     }));
    }
  }
  ctx.write_text("plot_ledger.py", plot_script("first-law ledger, replica 0", "ledger_r0.csv", "t",
                                               {"E", "W", "Q_p", "Q_r", "first_law_residual"}));
  ctx.check("ledger_nonempty", ledger_rows >= 2, fmt::format("{} ledger rows", ledger_rows));

  // The pathwise residual is a first-order time-discretization error: the
  // same coarse Brownian path refined once must roughly halve it.
  if (res.replicas[0]) {
    auto chain = cfg.chain_config(cfg.N, ensemble::replica_seed(cfg.seed, 0));
    chain.refinement += 1;
    chain.record_times = {cfg.t_end};
    const auto fine = stage("first-law refinement", [&] { return micro::run_trajectory(chain, ctx.model, tau0); });
    ctx.add_steps("micro", fine.steps);
    const double coarse_res = std::abs(res.replicas[0]->final.first_law_residual());
    const double fine_res = std::abs(fine.final_ledger.first_law_residual());
    const double ratio = coarse_res / fine_res;
    ctx.check("first_law_dt_scaling", ratio >= 1.6 && ratio <= 2.4,
              fmt::format("|residual| {:.6g} at dt, {:.6g} at dt/2, ratio {:.3f} (expect 2 +- 20%)", coarse_res,
                          fine_res, ratio));
  }
}

// ---------------------------------------------------------- quasistatic sweep

void run_quasistatic_sweep(Context& ctx)
{
  const auto& cfg = ctx.cfg;
  const double tau0 = cfg.schedule.tau0;
  const double tau1 = cfg.schedule.tau1;
  const double rho0 = ctx.table.strain_of_tension(tau0);
  auto times = cfg.ramp_times;
  std::sort(times.begin(), times.end());

  struct Run
  {
    double ramp_time;
    macro::MacroTrajectory traj;
    macro::ClausiusResult gap;
  };
  std::vector<std::optional<Run>> runs(times.size());
  stage("macro sweep", [&] {
    ensemble::parallel_for(static_cast<int>(times.size()), cfg.threads, [&](int k) {
      auto mc = cfg.macro_config(times[k] + cfg.settle_time);
      mc.schedule = TensionSchedule::ramp(tau0, tau1, times[k]);
      auto traj = macro::advance(macro::equilibrium_state(cfg.M, rho0), mc, ctx.table, mc.t_end);
      const auto gap = macro::clausius_gap(traj, ctx.table, tau0, tau1);
      runs[k] = Run{times[k], std::move(traj), gap};
    });
  });

  write_csv_text(ctx, "clausius.csv", to_csv([&](std::ostream& os) {
                   csv::Writer w(os, {"ramp_time", "W", "closing_work", "dF", "gap", "D", "momentum_norm",
                                      "max_balance_residual"});
                   for (const auto& r : runs) {
                     w.row(r->ramp_time, r->gap.work, r->gap.closing_work, r->gap.delta_free, r->gap.gap,
                           r->gap.dissipation, r->gap.momentum_norm, r->traj.max_residual);
                   }
                 }));
  bool monotone = true;
  double worst_balance = 0.0;
  for (const auto& r : runs) {
    ctx.add_steps("macro", r->traj.steps);
    monotone = monotone && r->traj.dissipation_monotone;
    worst_balance = std::max(worst_balance, r->traj.max_residual);
    write_csv_text(ctx, fmt::format("balance_t1_{:g}.csv", r->ramp_time), to_csv([&](std::ostream& os) {
                     csv::write_balance(os, r->traj.balance);
                   }));
  }
  ctx.write_text("plot_clausius.py",
                 plot_script("Clausius gap vs ramp duration", "clausius.csv", "ramp_time", {"gap", "D", "W"}));

  bool decreasing = true;
  bool nonnegative = true;
  std::string gaps;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    gaps += fmt::format("{}{:g}:{:.6g}", k ? " " : "", runs[k]->ramp_time, runs[k]->gap.gap);
    nonnegative = nonnegative && runs[k]->gap.gap >= -1e-4;
    if (k > 0) decreasing = decreasing && runs[k]->gap.gap < runs[k - 1]->gap.gap;
  }
  ctx.check("clausius_gap_decreasing", decreasing, gaps);
  ctx.check("clausius_gap_nonnegative", nonnegative, fmt::format("{} (each >= -1e-4)", gaps));
  ctx.check("dissipation_monotone", monotone, fmt::format("max balance residual {:.3e}", worst_balance));
}

// ---------------------------------------------------------------------- shock

/// Bound on the viscous flux term of the entropy balance:
/// int int |phi_x| (delta2 |p p_x| + delta1 |tau tau_x|) dx dt.
double viscous_entropy_bound(std::span<const blocks::Profile> series, const thermo::ThermoTable& table,
                             const TestFunction& phi, double delta1, double delta2)
{
  const auto slice = [&](const blocks::Profile& prof) {
    const std::size_t M = prof.r.size();
    std::vector<double> tau(M);
    for (std::size_t j = 0; j < M; ++j) tau[j] = table.tension(prof.r[j]);
    double acc = 0.0;
    for (std::size_t j = 0; j < M; ++j) {
      const double x = prof.x0 + static_cast<double>(j) * prof.dx;
      const double fx = phi.d_x(prof.t, x);
      if (fx == 0.0) continue;
      const std::size_t a = j == 0 ? 0 : j - 1;
      const std::size_t b = j + 1 == M ? M - 1 : j + 1;
      const double h = static_cast<double>(b - a) * prof.dx;
      const double px = (prof.p[b] - prof.p[a]) / h;
      const double tx = (tau[b] - tau[a]) / h;
      acc += std::abs(fx) * (delta2 * std::abs(prof.p[j] * px) + delta1 * std::abs(tau[j] * tx)) * prof.dx;
    }
    return acc;
  };
  double total = 0.0;
  double prev = slice(series[0]);
  for (std::size_t k = 1; k < series.size(); ++k) {
    const double cur = slice(series[k]);
    total += 0.5 * (series[k].t - series[k - 1].t) * (prev + cur);
    prev = cur;
  }
  return total;
}

void run_shock(Context& ctx)
{
  const auto& cfg = ctx.cfg;
  const double tau0 = cfg.schedule.tau0;
  const double rho0 = ctx.table.strain_of_tension(tau0);
  const auto tests = builtin_test_functions(cfg.t_end);

  const auto mc = cfg.macro_config(cfg.t_end);
  const auto traj = stage("macro solve", [&] {
    return macro::advance(macro::equilibrium_state(cfg.M, rho0), mc, ctx.table, cfg.t_end);
  });
  ctx.add_steps("macro", traj.steps);
  std::vector<blocks::Profile> macro_series;
  for (const auto& s : traj.snapshots) macro_series.push_back(macro::to_profile(s));

  json report;
  report["macro_entropy"] = json::array();
  bool entropy_ok = true;
  std::string detail;
  for (const auto& phi : tests) {
    bool nonnegative = true;
    for (double t : {phi.t_lo, 0.5 * (phi.t_lo + phi.t_hi)}) {
      for (int j = 0; j <= 64; ++j) {
        const double x = phi.x_lo + (phi.x_hi - phi.x_lo) * j / 64.0;
        nonnegative = nonnegative && phi.value(t, x) >= 0.0;
      }
    }
    if (!nonnegative) continue;
    const double residual = macro::entropy_pair_residual(macro_series, ctx.table, phi);
    const double bound = viscous_entropy_bound(macro_series, ctx.table, phi, cfg.delta1, cfg.delta2);
    const bool ok = residual >= -bound * (1.0 + 1e-6) - 1e-12;
    entropy_ok = entropy_ok && ok;
    detail += fmt::format("{}{}: {:.4g} >= -{:.4g}", detail.empty() ? "" : "; ", phi.id, residual, bound);
    report["macro_entropy"].push_back({{"id", phi.id}, {"residual", residual}, {"viscous_bound", bound}});
  }

  // Microscopic weak residuals on the block-averaged fields.
  report["micro_weak"] = json::array();
  if (cfg.replicas >= 1) {
    const blocks::BlockSpec spec{cfg.block_size_for(cfg.N), cfg.N};
    struct Replica
    {
      std::vector<blocks::WeakResidual> residuals;
      micro::Trajectory traj;
      long long steps;
    };
    const double x_lo = (spec.l - 0.5) / cfg.N;
    const double x_hi = (cfg.N - spec.l + 1.5) / cfg.N;
    std::vector<const TestFunction*> usable;
    for (const auto& phi : tests) {
      if (phi.x_lo >= x_lo && phi.x_hi <= x_hi) usable.push_back(&phi);
    }
    const auto res = stage("micro ensemble", [&] {
      return ensemble::run<Replica>(cfg.replicas, cfg.threads, [&](int k) {
        const auto chain = cfg.chain_config(cfg.N, ensemble::replica_seed(cfg.seed, k));
        auto tr = micro::run_trajectory(chain, ctx.model, tau0);
        std::vector<blocks::Profile> series;
        for (const auto& s : tr.snapshots) series.push_back(blocks::to_profile(blocks::build_field(s, spec)));
        Replica rep;
        for (const auto* phi : usable) rep.residuals.push_back(blocks::weak_residual(series, *phi, *phi, ctx.table));
        rep.steps = tr.steps;
        if (k == 0) rep.traj = std::move(tr);
        return rep;
      });
    });
    ctx.settle(res, 1, "shock micro");
    for (std::size_t f = 0; f < usable.size(); ++f) {
      std::vector<double> mass, mom;
      for (const auto& r : res.replicas) {
        if (!r) continue;
        mass.push_back(r->residuals[f].mass);
        mom.push_back(r->residuals[f].momentum);
      }
      const auto m = stats::mean_se(mass);
      const auto q = stats::mean_se(mom);
      report["micro_weak"].push_back({{"id", usable[f]->id},
                                      {"mass_mean", m.mean},
                                      {"mass_se", m.se},
                                      {"momentum_mean", q.mean},
                                      {"momentum_se", q.se}});
    }
    for (const auto& r : res.replicas) {
      if (r) ctx.add_steps("micro", r->steps);
    }
    if (res.replicas[0] && cfg.write_snapshots) {
      write_csv_text(ctx, "snapshots_r0.csv", to_csv([&](std::ostream& os) {
                       csv::write_snapshots(os, res.replicas[0]->traj.snapshots);
                     }));
    }
  }

  write_csv_text(ctx, "macro_fields.csv", to_csv([&](std::ostream& os) {
                   csv::write_macro_fields(os, traj.snapshots, ctx.table);
                 }));
  write_csv_text(ctx, "balance.csv", to_csv([&](std::ostream& os) { csv::write_balance(os, traj.balance); }));
  ctx.write_text("residuals.json", report.dump(2) + "\n");
  ctx.write_text("plot_fields.py", plot_script("viscous p-system fields", "macro_fields.csv", "x", {"r", "p", "tau"}, "t"));

  ctx.check("entropy_inequality", entropy_ok, detail);
  ctx.check("dissipation_monotone", traj.dissipation_monotone,
            fmt::format("max balance residual {:.3e}", traj.max_residual));
}

// ---------------------------------------------------------- convergence study

void run_convergence_study(Context& ctx)
{
  const auto& cfg = ctx.cfg;
  require_replicas(cfg, 2);
  const double tau0 = cfg.schedule.tau0;
  const double rho0 = ctx.table.strain_of_tension(tau0);

  const auto mc = cfg.macro_config(cfg.t_end);
  const auto ref = stage("macro reference", [&] {
    return macro::advance(macro::equilibrium_state(cfg.M, rho0), mc, ctx.table, cfg.t_end);
  });
  ctx.add_steps("macro", ref.steps);
  std::vector<blocks::Profile> ref_series;
  for (const auto& s : ref.snapshots) ref_series.push_back(macro::to_profile(s));

  struct Job
  {
    int N;
    int replica;
  };
  std::vector<Job> jobs;
  for (int n : cfg.Ns) {
    for (int k = 0; k < cfg.replicas; ++k) jobs.push_back({n, k});
  }
  struct Replica
  {
    ComparisonReport report;
    long long steps;
  };
  const auto res = stage("micro ensemble", [&] {
    return ensemble::run<Replica>(static_cast<int>(jobs.size()), cfg.threads, [&](int j) {
      const auto [n, k] = jobs[j];
      const auto chain = cfg.chain_config(n, ensemble::replica_seed(size_seed(cfg.seed, n), k));
      const auto tr = micro::run_trajectory(chain, ctx.model, tau0);
      const blocks::BlockSpec spec{cfg.block_size_for(n), n};
      std::vector<blocks::Profile> micro;
      for (const auto& s : tr.snapshots) {
        if (s.t > 0.0) micro.push_back(blocks::to_profile(blocks::build_field(s, spec)));
      }
      return Replica{compare_micro_macro(micro, ref_series, cfg.window_lo, cfg.window_hi, n), tr.steps};
    });
  });
  ctx.settle(res, 2, "convergence study");

  std::vector<stats::MeanSE> trend;
  std::string summary = to_csv([&](std::ostream& os) {
    csv::Writer w(os, {"N", "l", "sigma", "replicas", "l1_mean", "l1_se", "l1_r_mean", "l1_p_mean", "l2_mean",
                       "l2_se"});
    for (int n : cfg.Ns) {
      std::vector<double> l1, l1r, l1p, l2;
      for (std::size_t j = 0; j < jobs.size(); ++j) {
        if (jobs[j].N != n || !res.replicas[j]) continue;
        const auto& rep = res.replicas[j]->report;
        l1.push_back(rep.mean_l1());
        l2.push_back(rep.mean_l2());
        double r = 0.0, p = 0.0;
        for (const auto& d : rep.distances) {
          r += d.l1_r;
          p += d.l1_p;
        }
        l1r.push_back(r / rep.distances.size());
        l1p.push_back(p / rep.distances.size());
      }
      const auto a = stats::mean_se(l1);
      const auto b = stats::mean_se(l2);
      trend.push_back(a);
      w.row(n, cfg.block_size_for(n), cfg.sigma_for(n), a.n, a.mean, a.se, stats::mean_se(l1r).mean,
            stats::mean_se(l1p).mean, b.mean, b.se);
    }
  });
  for (const auto& r : res.replicas) {
    if (r) ctx.add_steps("micro", r->steps);
  }
  write_csv_text(ctx, "comparison.csv", to_csv([&](std::ostream& os) {
                   csv::Writer w(os, {"N", "replica", "t", "l1_r", "l1_p", "l2_r", "l2_p"});
                   for (std::size_t j = 0; j < jobs.size(); ++j) {
                     if (!res.replicas[j]) continue;
                     for (const auto& d : res.replicas[j]->report.distances) {
                       w.row(jobs[j].N, jobs[j].replica, d.t, d.l1_r, d.l1_p, d.l2_r, d.l2_p);
                     }
                   }
                 }));
  write_csv_text(ctx, "convergence_summary.csv", summary);
  write_csv_text(ctx, "macro_fields.csv", to_csv([&](std::ostream& os) {
                   csv::write_macro_fields(os, ref.snapshots, ctx.table);
                 }));
  write_csv_text(ctx, "balance.csv", to_csv([&](std::ostream& os) { csv::write_balance(os, ref.balance); }));
  ctx.write_text("plot_convergence.py", plot_script("interior L1 distance to the viscous reference",
                                                    "convergence_summary.csv", "N", {"l1_mean", "l2_mean"}));

  std::string detail;
  for (std::size_t k = 0; k < trend.size(); ++k) {
    detail += fmt::format("{}N={}: {:.5g} +- {:.2g}", k ? "; " : "", cfg.Ns[k], trend[k].mean, trend[k].se);
    if (k > 0) detail += fmt::format(" ({:.1f} pooled se)", stats::separation(trend[k - 1], trend[k]));
  }
  ctx.check("convergence_trend", stats::decreasing_trend(trend, 2.0), detail);
}

// ------------------------------------------------------------- block scaling

constexpr std::array<const char*, 8> kBlockStats{"one_block",      "two_block_r",   "two_block_p",
                                                 "two_block_Vp",   "two_block_tau", "hat_bar_gap_r",
                                                 "hat_bar_gap_p",  "hat_bar_gap_Vp"};

std::array<double, 8> block_statistics(const micro::ChainState& s, const blocks::BlockSpec& spec,
                                       const thermo::ThermoTable& table, const thermo::PotentialParams& pot)
{
  using blocks::Field;
  return {blocks::one_block_statistic(s, spec, table),
          blocks::two_block_statistic(s, spec, Field::Strain, table),
          blocks::two_block_statistic(s, spec, Field::Momentum, table),
          blocks::two_block_statistic(s, spec, Field::Force, table),
          blocks::two_block_statistic(s, spec, Field::Tension, table),
          blocks::hat_bar_gap_statistic(s, spec, Field::Strain, pot),
          blocks::hat_bar_gap_statistic(s, spec, Field::Momentum, pot),
          blocks::hat_bar_gap_statistic(s, spec, Field::Force, pot)};
}

void run_block_scaling(Context& ctx)
{
  const auto& cfg = ctx.cfg;
  require_replicas(cfg, 2);
  for (int n : cfg.Ns) {
    for (int l : cfg.ls) {
      if (2 * l > n) throw ConfigError(fmt::format("block size {} too large for N = {} (need 2 l <= N)", l, n));
    }
  }
  const double tau0 = cfg.schedule.tau0;

  struct Job
  {
    int N;
    int replica;
  };
  std::vector<Job> jobs;
  for (int n : cfg.Ns) {
    for (int k = 0; k < cfg.replicas; ++k) jobs.push_back({n, k});
  }
  struct Replica
  {
    // [l index][record][statistic]
    std::vector<std::vector<std::array<double, 8>>> values;
    std::vector<double> times;
    long long steps;
  };
  const auto res = stage("micro ensemble", [&] {
    return ensemble::run<Replica>(static_cast<int>(jobs.size()), cfg.threads, [&](int j) {
      const auto [n, k] = jobs[j];
      const auto chain = cfg.chain_config(n, ensemble::replica_seed(size_seed(cfg.seed, n), k));
      const auto tr = micro::run_trajectory(chain, ctx.model, tau0);
      Replica rep;
      rep.steps = tr.steps;
      for (const auto& s : tr.snapshots) rep.times.push_back(s.t);
      for (int l : cfg.ls) {
        const blocks::BlockSpec spec{l, n};
        auto& per_l = rep.values.emplace_back();
        for (const auto& s : tr.snapshots) per_l.push_back(block_statistics(s, spec, ctx.table, cfg.potential()));
      }
      return rep;
    });
  });
  ctx.settle(res, 2, "block scaling");

  std::ostringstream stats_os;
  csv::Writer sw(stats_os, {"t", "N", "l", "sigma", "one_block", "two_block_r", "two_block_p", "two_block_Vp",
                            "two_block_tau", "hat_bar_gap_r", "hat_bar_gap_p", "hat_bar_gap_Vp", "replica"});
  std::ostringstream sum_os;
  csv::Writer uw(sum_os, {"N", "l", "statistic", "mean", "se", "n"});

  for (int n : cfg.Ns) {
    // time-averaged statistic per (l, replica)
    std::vector<std::array<stats::MeanSE, 8>> per_l(cfg.ls.size());
    for (std::size_t li = 0; li < cfg.ls.size(); ++li) {
      std::array<std::vector<double>, 8> samples;
      for (std::size_t j = 0; j < jobs.size(); ++j) {
        if (jobs[j].N != n || !res.replicas[j]) continue;
        const auto& rep = *res.replicas[j];
        std::array<double, 8> avg{};
        for (std::size_t t = 0; t < rep.times.size(); ++t) {
          const auto& v = rep.values[li][t];
          sw.row(rep.times[t], n, cfg.ls[li], cfg.sigma_for(n), v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7],
                 jobs[j].replica);
          for (int s = 0; s < 8; ++s) avg[s] += v[s] / static_cast<double>(rep.times.size());
        }
        for (int s = 0; s < 8; ++s) samples[s].push_back(avg[s]);
      }
      for (int s = 0; s < 8; ++s) {
        per_l[li][s] = stats::mean_se(samples[s]);
        uw.row(n, cfg.ls[li], kBlockStats[s], per_l[li][s].mean, per_l[li][s].se, per_l[li][s].n);
      }
    }
    for (int s : {0, 1, 2}) {
      std::vector<stats::MeanSE> seq;
      std::string detail;
      for (std::size_t li = 0; li < cfg.ls.size(); ++li) {
        seq.push_back(per_l[li][s]);
        detail += fmt::format("{}l={}: {:.5g} +- {:.2g}", li ? "; " : "", cfg.ls[li], per_l[li][s].mean,
                              per_l[li][s].se);
        if (li > 0) detail += fmt::format(" ({:.1f} pooled se)", stats::separation(per_l[li - 1][s], per_l[li][s]));
      }
      ctx.check(fmt::format("N{}_{}_decreasing", n, kBlockStats[s]), stats::decreasing_trend(seq, 2.0), detail);
    }
  }
  for (const auto& r : res.replicas) {
    if (r) ctx.add_steps("micro", r->steps);
  }
  write_csv_text(ctx, "statistics.csv", stats_os.str());
  write_csv_text(ctx, "block_summary.csv", sum_os.str());
  ctx.write_text("plot_blocks.py", fmt::format(R"(#!/usr/bin/env python3
# block statistics vs block size, one curve per N
import csv
import sys
from collections import defaultdict

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

rows = list(csv.DictReader(open("block_summary.csv")))
stats = sorted({{r["statistic"] for r in rows}})
fig, axes = plt.subplots(len(stats), 1, figsize=(6, 2.4 * len(stats)), squeeze=False)
for ax, name in zip(axes[:, 0], stats):
    curves = defaultdict(list)
    for r in rows:
        if r["statistic"] == name:
            curves[int(r["N"])].append((int(r["l"]), float(r["mean"]), float(r["se"])))
    for n, pts in sorted(curves.items()):
        pts.sort()
        ax.errorbar([p[0] for p in pts], [p[1] for p in pts], yerr=[2 * p[2] for p in pts], label=f"N={{n}}")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_ylabel(name)
    ax.legend(fontsize="small")
axes[-1, 0].set_xlabel("l")
fig.tight_layout()
fig.savefig(sys.argv[1] if len(sys.argv) > 1 else "block_summary.png", dpi=120)
)"));
}

using Preset = void (*)(Context&);

Preset find_preset(const std::string& name)
{
  static const std::map<std::string, Preset> presets = {
      {"equilibrium", run_equilibrium},          {"ramp", run_ramp},
      {"quasistatic_sweep", run_quasistatic_sweep}, {"shock", run_shock},
      {"convergence_study", run_convergence_study}, {"block_scaling", run_block_scaling}};
  const auto it = presets.find(name);
  if (it == presets.end()) {
    throw ConfigError(name.empty() ? std::string("no experiment given (set 'experiment = ...')")
                                   : fmt::format("unknown experiment '{}'", name));
  }
  return it->second;
}

}  // namespace

bool ExperimentResult::passed() const noexcept
{
  return std::all_of(manifest.checks.begin(), manifest.checks.end(), [](const auto& c) { return c.passed; });
}

std::vector<std::uint64_t> planned_seeds(const RunConfig& cfg)
{
  std::vector<std::uint64_t> seeds;
  if (cfg.experiment == "convergence_study" || cfg.experiment == "block_scaling") {
    for (int n : cfg.Ns) {
      for (int k = 0; k < cfg.replicas; ++k) seeds.push_back(ensemble::replica_seed(size_seed(cfg.seed, n), k));
    }
  } else if (cfg.experiment == "quasistatic_sweep") {
    seeds.push_back(cfg.seed);
  } else {
    for (int k = 0; k < cfg.replicas; ++k) seeds.push_back(ensemble::replica_seed(cfg.seed, k));
  }
  return seeds;
}

ExperimentResult run_experiment(const RunConfig& config, const std::filesystem::path& out_dir)
{
  config.validate();
  const Preset preset = find_preset(config.experiment);
  const auto start = std::chrono::steady_clock::now();

  ExperimentResult result;
  auto& m = result.manifest;
  m.experiment = config.experiment;
  m.status = "started";
  m.config_text = config.to_text();
  m.seeds = planned_seeds(config);
  m.version = version_string();
  m.fingerprint = build_fingerprint();
  std::filesystem::create_directories(out_dir);
  result.manifest_path = out_dir / "manifest.json";
  m.write(result.manifest_path);
  spdlog::info("{}: writing to {}", config.experiment, out_dir.string());

  const auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  try {
    Context ctx(config, out_dir, m);
    ctx.write_text("config.txt", m.config_text);
    preset(ctx);
    m.outputs = ctx.out.entries();
  } catch (const std::exception& e) {
    m.status = "error";
    m.error = e.what();
    m.wall_clock_seconds = elapsed();
    m.write(result.manifest_path);
    throw;
  }
  m.status = result.passed() ? "passed" : "failed";
  m.wall_clock_seconds = elapsed();
  m.write(result.manifest_path);
  return result;
}

RerunReport rerun_manifest(const std::filesystem::path& manifest, const std::filesystem::path& out_dir)
{
  const auto original = RunManifest::read(manifest);
  const auto cfg = parse_config_text(original.config_text, manifest.string() + ":config");
  if (std::filesystem::exists(out_dir) &&
      std::filesystem::equivalent(out_dir, manifest.parent_path().empty() ? "." : manifest.parent_path())) {
    throw ConfigError("rerun output directory must differ from the original run directory");
  }
  RerunReport report{run_experiment(cfg, out_dir), {}};
  const auto& fresh = report.result.manifest.outputs;
  for (const auto& o : original.outputs) {
    const auto it = std::find_if(fresh.begin(), fresh.end(), [&](const auto& f) { return f.file == o.file; });
    if (it == fresh.end()) {
      report.mismatches.push_back(fmt::format("{}: missing from rerun", o.file));
    } else if (it->fnv1a != o.fnv1a || it->bytes != o.bytes) {
      report.mismatches.push_back(
          fmt::format("{}: {} bytes/{} vs {} bytes/{}", o.file, o.bytes, o.fnv1a, it->bytes, it->fnv1a));
    }
  }
  for (const auto& f : fresh) {
    const bool known = std::any_of(original.outputs.begin(), original.outputs.end(),
                                   [&](const auto& o) { return o.file == f.file; });
    if (!known) report.mismatches.push_back(fmt::format("{}: not in the original manifest", f.file));
  }
  return report;
}

}  // namespace hydrochain
