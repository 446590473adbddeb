#include "hydrochain/macro.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "hydrochain/error.hpp"

namespace hydrochain::macro {

namespace {

// Right-hand side and power balance evaluated from one pass over the cells.
class Evaluator
{
 public:
  Evaluator(const MacroConfig& config, const thermo::ThermoTable& table)
      : cfg_(config), table_(table), tau_(static_cast<std::size_t>(config.M) + 2)
  {
  }

  BalanceRates operator()(const MacroState& s, double tau_bar, std::vector<double>& dr,
                          std::vector<double>& dp)
  {
    const int M = s.size();
    const double dx = 1.0 / M;
    const double inv2dx = 0.5 / dx;
    const double invdx2 = 1.0 / (dx * dx);
    const double d1 = cfg_.delta1;
    const double d2 = cfg_.delta2;

    // tau_[j + 1] holds cell j; tau_[0] and tau_[M + 1] are ghosts.
    for (int j = 0; j < M; ++j) tau_[j + 1] = table_.tension(s.r[j]);
    tau_[0] = tau_[1];
    tau_[M + 1] = 2.0 * tau_bar - tau_[M];
    const auto p_at = [&](int j) {
      if (j < 0) return -s.p[0];
      if (j >= M) return s.p[M - 1];
      return s.p[j];
    };

    dr.resize(M);
    dp.resize(M);
    for (int j = 0; j < M; ++j) {
      const double pl = p_at(j - 1);
      const double pr = p_at(j + 1);
      const double tl = tau_[j];
      const double tc = tau_[j + 1];
      const double tr = tau_[j + 2];
      dr[j] = (pr - pl) * inv2dx + d1 * (tr - 2.0 * tc + tl) * invdx2;
      dp[j] = (tr - tl) * inv2dx + d2 * (pr - 2.0 * s.p[j] + pl) * invdx2;
    }

    BalanceRates b{};
    b.boundary_momentum = s.p[M - 1];
    b.boundary_flux = (tau_[M + 1] - tau_[M]) / dx;
    b.work_rate = tau_bar * (b.boundary_momentum + d1 * b.boundary_flux);

    double gt = 0.0, gp = 0.0;
    for (int j = 0; j + 1 < M; ++j) {
      const double et = (tau_[j + 2] - tau_[j + 1]) / dx;
      const double ep = (s.p[j + 1] - s.p[j]) / dx;
      gt += et * et;
      gp += ep * ep;
    }
    const double left_p_grad = 2.0 * s.p[0] / dx;
    b.dissipation_rate = d1 * dx * (gt + 0.5 * b.boundary_flux * b.boundary_flux) +
                         d2 * dx * (gp + 0.5 * left_p_grad * left_p_grad);
    return b;
  }

 private:
  const MacroConfig& cfg_;
  const thermo::ThermoTable& table_;
  std::vector<double> tau_;
};

double length_of(const MacroState& s)
{
  double acc = 0.0;
  for (double r : s.r) acc += r;
  return acc / s.size();
}

}  // namespace

double MacroConfig::max_dt(double c2) const noexcept
{
  const double h = dx();
  double bound = h / std::sqrt(c2);
  const double diff = std::max(delta1 * c2, delta2);
  if (diff > 0.0) bound = std::min(bound, h * h / (2.0 * diff));
  return cfl * bound;
}

void MacroConfig::validate() const
{
  if (M < 4) throw ConfigError(fmt::format("M = {} must be at least 4", M));
  if (!(delta1 >= 0.0) || !(delta2 >= 0.0)) {
    throw ConfigError(fmt::format("viscosities must be nonnegative (delta1 = {}, delta2 = {})", delta1, delta2));
  }
  if (!(cfl > 0.0 && cfl < 1.0)) throw ConfigError(fmt::format("cfl = {} must lie in (0, 1)", cfl));
  if (!(t_end > 0.0)) throw ConfigError(fmt::format("t_end = {} must be positive", t_end));
  if (!std::is_sorted(record_times.begin(), record_times.end())) {
    throw ConfigError("record_times must be sorted");
  }
  schedule.validate();
}

MacroState equilibrium_state(int M, double rho)
{
  return {std::vector<double>(static_cast<std::size_t>(M), rho),
          std::vector<double>(static_cast<std::size_t>(M), 0.0), 0.0};
}

Ghosts apply_bcs(const MacroState& state, double tau_bar, const thermo::ThermoTable& table)
{
  const int M = state.size();
  Ghosts g{};
  g.r_left = state.r[0];
  g.p_left = -state.p[0];
  g.tau_left = table.tension(state.r[0]);
  g.tau_right = 2.0 * tau_bar - table.tension(state.r[M - 1]);
  g.r_right = table.strain_of_tension(g.tau_right);
  g.p_right = state.p[M - 1];
  return g;
}

Rhs viscous_rhs(const MacroState& state, double tau_bar, const MacroConfig& config,
                const thermo::ThermoTable& table)
{
  Evaluator eval(config, table);
  Rhs out;
  eval(state, tau_bar, out.dr, out.dp);
  return out;
}

BalanceRates balance_rates(const MacroState& state, double tau_bar, const MacroConfig& config,
                           const thermo::ThermoTable& table)
{
  Evaluator eval(config, table);
  std::vector<double> dr, dp;
  return eval(state, tau_bar, dr, dp);
}

double free_energy_functional(const MacroState& state, const thermo::ThermoTable& table)
{
  double acc = 0.0;
  for (int j = 0; j < state.size(); ++j) {
    acc += 0.5 * state.p[j] * state.p[j] + table.free_energy(state.r[j]);
  }
  return acc / state.size();
}

MacroTrajectory advance(const MacroState& state, const MacroConfig& config,
                        const thermo::ThermoTable& table, double t_target)
{
  config.validate();
  if (state.size() != config.M || static_cast<int>(state.p.size()) != config.M) {
    throw ConfigError(fmt::format("state has {} cells, config M = {}", state.size(), config.M));
  }
  if (!(t_target > state.t)) {
    throw ConfigError(fmt::format("t_target = {} must exceed the state time {}", t_target, state.t));
  }

  const double span = t_target - state.t;
  const double dt_max = config.max_dt(table.model().c2());
  const long long steps = static_cast<long long>(std::ceil(span / dt_max - 1e-9));
  const double dt = span / static_cast<double>(steps);

  std::vector<long long> record_steps;
  for (double t : config.record_times) {
    if (t < state.t - 1e-12 || t > t_target + 1e-12) continue;
    record_steps.push_back(std::clamp<long long>(std::llround((t - state.t) / dt), 0, steps));
  }

  MacroTrajectory traj;
  traj.dt = dt;
  traj.steps = steps;
  traj.initial_free_energy = free_energy_functional(state, table);

  Evaluator eval(config, table);
  MacroState cur = state;
  MacroState pred = state;
  std::vector<double> dr0, dp0, dr1, dp1;
  double work = 0.0;
  double diss = 0.0;
  const double t0 = state.t;
  const int M = config.M;

  const auto make_record = [&](const MacroState& s) {
    BalanceRecord rec{};
    rec.t = s.t;
    rec.free_energy = free_energy_functional(s, table);
    rec.work = work;
    rec.dissipation = diss;
    rec.residual = std::abs(rec.free_energy - traj.initial_free_energy - work + diss);
    rec.length = length_of(s);
    return rec;
  };

  std::size_t rec = 0;
  const auto record = [&](long long n) {
    while (rec < record_steps.size() && record_steps[rec] == n) {
      traj.snapshots.push_back(cur);
      traj.balance.push_back(make_record(cur));
      ++rec;
    }
  };
  record(0);

  for (long long n = 0; n < steps; ++n) {
    const double tn = t0 + static_cast<double>(n) * dt;
    const double tn1 = t0 + static_cast<double>(n + 1) * dt;
    const BalanceRates b0 = eval(cur, config.schedule(tn), dr0, dp0);
    for (int j = 0; j < M; ++j) {
      pred.r[j] = cur.r[j] + dt * dr0[j];
      pred.p[j] = cur.p[j] + dt * dp0[j];
    }
    pred.t = tn1;
    const BalanceRates b1 = eval(pred, config.schedule(tn1), dr1, dp1);
    bool finite = true;
    for (int j = 0; j < M; ++j) {
      cur.r[j] += 0.5 * dt * (dr0[j] + dr1[j]);
      cur.p[j] += 0.5 * dt * (dp0[j] + dp1[j]);
      finite = finite && std::isfinite(cur.r[j]) && std::isfinite(cur.p[j]);
    }
    cur.t = tn1;
    if (!finite) {
      throw BlowUpError(fmt::format("viscous p-system blew up at step {} (t = {})", n + 1, tn1), n + 1, tn1);
    }
    work += 0.5 * dt * (b0.work_rate + b1.work_rate);
    const double d_inc = 0.5 * dt * (b0.dissipation_rate + b1.dissipation_rate);
    if (d_inc < 0.0) traj.dissipation_monotone = false;
    diss += d_inc;

    const double residual =
        std::abs(free_energy_functional(cur, table) - traj.initial_free_energy - work + diss);
    traj.max_residual = std::max(traj.max_residual, residual);
    record(n + 1);
  }
  traj.final = make_record(cur);
  traj.final_state = std::move(cur);
  spdlog::debug("macro M={} t={} steps={} max balance residual {:.3e}", M, t_target, steps,
                traj.max_residual);
  return traj;
}

WorkDissipation work_and_dissipation(const MacroTrajectory& trajectory)
{
  WorkDissipation out;
  for (const auto& rec : trajectory.balance) {
    out.t.push_back(rec.t);
    out.work.push_back(rec.work);
    out.dissipation.push_back(rec.dissipation);
    out.residual.push_back(rec.residual);
  }
  return out;
}

ClausiusResult clausius_gap(const MacroTrajectory& trajectory, const thermo::ThermoTable& table,
                            double tau0, double tau1)
{
  const double rho0 = table.strain_of_tension(tau0);
  const double rho1 = table.strain_of_tension(tau1);
  ClausiusResult out{};
  out.work = trajectory.final.work;
  out.closing_work = tau1 * (rho1 - trajectory.final.length);
  out.delta_free = table.free_energy(rho1) - table.free_energy(rho0);
  out.dissipation = trajectory.final.dissipation;
  double p2 = 0.0;
  for (double p : trajectory.final_state.p) p2 += p * p;
  out.momentum_norm = std::sqrt(p2 / std::max(1, trajectory.final_state.size()));
  out.stationary = out.momentum_norm < 1e-3;
  out.gap = out.work + out.closing_work - out.delta_free;
  if (!out.stationary) {
    spdlog::debug("clausius_gap: final state not stationary (||p|| = {:.3e}); gap closed at held tension",
                 out.momentum_norm);
  }
  return out;
}

EntropyPair entropy_pair(double r, double p, const thermo::ThermoTable& table)
{
  const double tau = table.tension(r);
  const double slope = table.tension_slope(r);
  EntropyPair e{};
  e.eta = 0.5 * p * p + table.free_energy(r);
  e.q = -p * tau;
  e.eta_r = tau;  // F' = tau
  e.eta_p = p;
  e.q_r = -p * slope;
  e.q_p = -tau;
  return e;
}

double entropy_pair_residual(std::span<const blocks::Profile> series, const thermo::ThermoTable& table,
                             const TestFunction& phi)
{
  if (series.size() < 2) throw ConfigError("entropy residual needs at least two recorded times");
  const double t_first = series.front().t;
  const double t_last = series.back().t;
  if (!(phi.t_lo > std::max(0.0, t_first) && phi.t_hi <= t_last && phi.x_lo > 0.0 && phi.x_hi < 1.0)) {
    throw ConfigError(fmt::format("test function {} support not inside (max(0, {}), {}] x (0, 1)", phi.id,
                                  t_first, t_last));
  }
  const auto slice = [&](const blocks::Profile& prof) {
    double acc = 0.0;
    for (std::size_t j = 0; j < prof.r.size(); ++j) {
      const double x = prof.x0 + static_cast<double>(j) * prof.dx;
      if (phi.value(prof.t, x) < 0.0) {
        throw ConfigError(fmt::format("test function {} is negative at ({}, {})", phi.id, prof.t, x));
      }
      const double ft = phi.d_t(prof.t, x);
      const double fx = phi.d_x(prof.t, x);
      if (ft == 0.0 && fx == 0.0) continue;
      const double tau = table.tension(prof.r[j]);
      const double eta = 0.5 * prof.p[j] * prof.p[j] + table.free_energy(prof.r[j]);
      const double q = -prof.p[j] * tau;
      acc += (eta * ft + q * fx) * prof.dx;
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

blocks::Profile to_profile(const MacroState& state)
{
  const double dx = 1.0 / state.size();
  return {state.t, 0.5 * dx, dx, state.r, state.p};
}

double interpolate(const std::vector<double>& cells, double x) noexcept
{
  const int M = static_cast<int>(cells.size());
  const double s = x * M - 0.5;
  if (s <= 0.0) return cells.front();
  if (s >= M - 1) return cells.back();
  const int j = static_cast<int>(s);
  const double w = s - j;
  return (1.0 - w) * cells[j] + w * cells[j + 1];
}

}  // namespace hydrochain::macro
