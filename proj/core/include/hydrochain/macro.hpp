#pragma once

#include <span>
#include <vector>

#include "hydrochain/blockstats.hpp"
#include "hydrochain/schedule.hpp"
#include "hydrochain/test_functions.hpp"
#include "hydrochain/thermo_table.hpp"

namespace hydrochain::macro {

/// Viscous p-system on (0,1):
///   r_t - p_x = delta1 (tau(r))_xx,   p_t - tau(r)_x = delta2 p_xx,
/// with p(t,0) = 0, r_x(t,0) = 0, tau(r(t,1)) = tau_bar(t), p_x(t,1) = 0.
struct MacroConfig
{
  int M = 400;
  double delta1 = 1e-3;
  double delta2 = 1e-3;
  TensionSchedule schedule = TensionSchedule::constant(0.0);
  double cfl = 0.4;
  double t_end = 1.0;
  std::vector<double> record_times;

  double dx() const noexcept { return 1.0 / M; }
  /// cfl * min(dx / sqrt(c2), dx^2 / (2 max(delta1 c2, delta2))).
  double max_dt(double c2 = 1.0) const noexcept;
  void validate() const;
};

/// Cell-centred state: cell j (0-based) has centre (j + 1/2) dx.
struct MacroState
{
  std::vector<double> r;
  std::vector<double> p;
  double t = 0.0;

  int size() const noexcept { return static_cast<int>(r.size()); }
  double x(int j) const noexcept { return (j + 0.5) / static_cast<double>(r.size()); }
};

MacroState equilibrium_state(int M, double rho);

/// Ghost-cell values implementing the boundary conditions.
/// Left: p reflected (p_ghost = -p_0, face value 0), r copied (zero gradient).
/// Right: tension reflected about tau_bar (tau_ghost = 2 tau_bar - tau_{M-1},
/// so the face tension is tau_bar), p copied (zero gradient).
struct Ghosts
{
  double r_left;
  double p_left;
  double tau_left;
  double r_right;
  double p_right;
  double tau_right;
};

Ghosts apply_bcs(const MacroState& state, double tau_bar, const thermo::ThermoTable& table);

struct Rhs
{
  std::vector<double> dr;
  std::vector<double> dp;
};

/// Second-order central differences for the advective and viscous terms.
Rhs viscous_rhs(const MacroState& state, double tau_bar, const MacroConfig& config,
                const thermo::ThermoTable& table);

/// Instantaneous power balance of the discrete scheme:
/// d/dt F_h = work_rate - dissipation_rate holds exactly for the semi-discrete system.
struct BalanceRates
{
  double boundary_momentum;  ///< p at x = 1
  double boundary_flux;      ///< tau_x at x = 1 (one-sided face gradient)
  double work_rate;          ///< tau_bar (p(1) + delta1 tau_x(1))
  double dissipation_rate;   ///< int delta1 tau_x^2 + delta2 p_x^2
};

BalanceRates balance_rates(const MacroState& state, double tau_bar, const MacroConfig& config,
                           const thermo::ThermoTable& table);

/// int_0^1 (p^2/2 + F(beta, r)) dx by the midpoint rule.
double free_energy_functional(const MacroState& state, const thermo::ThermoTable& table);

struct BalanceRecord
{
  double t;
  double free_energy;
  double work;
  double dissipation;
  double residual;  ///< |F(t) - F(0) - W(t) + D(t)|
  double length;    ///< L(t) = int r dx
};

struct MacroTrajectory
{
  std::vector<MacroState> snapshots;  ///< one per record time
  std::vector<BalanceRecord> balance; ///< one per record time
  double initial_free_energy = 0.0;
  double max_residual = 0.0;          ///< over every time step
  bool dissipation_monotone = true;   ///< D(t_{n+1}) >= D(t_n) for every step
  BalanceRecord final{};
  MacroState final_state;
  double dt = 0.0;
  long long steps = 0;
};

/// Heun (explicit trapezoid) integration from `state` to t_target, recording
/// snapshots at config.record_times that fall within (state.t, t_target].
/// Work and dissipation are accumulated with the scheme's discrete fluxes.
/// Throws BlowUpError on non-finite values.
MacroTrajectory advance(const MacroState& state, const MacroConfig& config,
                        const thermo::ThermoTable& table, double t_target);

/// W, D and balance residual series extracted from a trajectory.
struct WorkDissipation
{
  std::vector<double> t;
  std::vector<double> work;
  std::vector<double> dissipation;
  std::vector<double> residual;
};

WorkDissipation work_and_dissipation(const MacroTrajectory& trajectory);

struct ClausiusResult
{
  double gap;             ///< W_closed - [F(rho1) - F(rho0)]
  double work;            ///< W(T)
  double closing_work;    ///< tau1 (rho1 - L(T)), work still to be done at held tension
  double delta_free;      ///< F(rho1) - F(rho0)
  double dissipation;     ///< D(T)
  double momentum_norm;   ///< ||p(T)||_2, stationarity diagnostic
  bool stationary;        ///< momentum_norm below 1e-3
};

/// Clausius gap for a transformation tau0 -> tau1 whose schedule is held at
/// tau1 by the end of the trajectory.
ClausiusResult clausius_gap(const MacroTrajectory& trajectory, const thermo::ThermoTable& table,
                            double tau0, double tau1);

/// Mechanical entropy pair eta = p^2/2 + F(r), q = -p tau(r) and its partials.
struct EntropyPair
{
  double eta;
  double q;
  double eta_r;
  double eta_p;
  double q_r;
  double q_p;
};

EntropyPair entropy_pair(double r, double p, const thermo::ThermoTable& table);

/// int int (eta phi_t + q phi_x) dx dt over a profile series (midpoint in x,
/// trapezoid in t). Throws ConfigError on support violations or negative phi.
double entropy_pair_residual(std::span<const blocks::Profile> series, const thermo::ThermoTable& table,
                             const TestFunction& phi);

blocks::Profile to_profile(const MacroState& state);

/// Linear interpolation of cell values at x (constant beyond the end centres).
double interpolate(const std::vector<double>& cells, double x) noexcept;

}  // namespace hydrochain::macro
