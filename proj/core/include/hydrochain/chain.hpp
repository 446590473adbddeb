#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hydrochain/schedule.hpp"
#include "hydrochain/thermo.hpp"

namespace hydrochain::micro {

/// sigma(N) = ceil(N^exponent); exponent 3/4 gives sigma/N -> 0 and N/sigma^2 -> 0.
double default_sigma(int N, double exponent = 0.75);

/// Largest Courant number theta = dt N sigma accepted by ChainConfig::validate.
inline constexpr double kMaxTheta = 0.25;
inline constexpr double kDefaultTheta = 0.1;

struct ChainConfig
{
  int N = 128;
  double sigma = 0.0;  ///< noise strength; <= 0 means default_sigma(N)
  double dt = 0.0;     ///< base (coarse) time step; <= 0 means kDefaultTheta / (N sigma)
  double t_end = 0.1;
  TensionSchedule schedule = TensionSchedule::constant(0.0);
  std::uint64_t seed = 1;
  std::vector<double> record_times;
  /// Brownian-bridge refinement levels below dt: the integrator runs at
  /// dt / 2^refinement driven by the same coarse Brownian path.
  int refinement = 0;

  // Toggles for diagnostics; all on for the physical dynamics.
  bool hamiltonian = true;
  bool noise_drift = true;
  bool noise = true;

  /// Fills sigma and dt defaults in place.
  void resolve_defaults();
  double fine_dt() const noexcept;
  /// Throws ConfigError naming the violated rule.
  void validate() const;
  /// Soft checks mirroring the sigma(N) asymptotics at the configured N.
  std::vector<std::string> warnings() const;
};

/// Microscopic configuration; index k holds site k+1 (the wall p_0 = 0 is implicit).
struct ChainState
{
  std::vector<double> r;
  std::vector<double> p;
  double t = 0.0;

  int size() const noexcept { return static_cast<int>(r.size()); }
  double length() const noexcept;  ///< L_N = (1/N) sum r_i
  double momentum() const noexcept;
};

struct Drift
{
  std::vector<double> dr;
  std::vector<double> dp;
};

/// E_N = (1/N) sum (p_i^2/2 + V(r_i)).
double chain_energy(const ChainState& state, const thermo::PotentialParams& potential);

/// Deterministic part of the SDE (Hamiltonian flow plus the noise drift).
Drift drift(const ChainState& state, double tau_bar, const ChainConfig& config,
            const thermo::ThermoModel& model);

/// Gaussian increments for one step: dw (momentum exchange) and dwt (strain
/// exchange), one per bond, each with variance dt.
struct NoiseIncrements
{
  std::vector<double> dw;
  std::vector<double> dwt;
};

/// Counter-based Brownian increments, addressed by (seed, coarse step, family,
/// bond). A coarse increment is split by Brownian-bridge bisection into
/// 2^levels fine increments; the coarse path is identical for every level.
class BrownianIncrements
{
 public:
  BrownianIncrements(std::uint64_t seed, int bonds, double coarse_dt, int levels);

  int bonds() const noexcept { return bonds_; }
  int fine_per_coarse() const noexcept { return 1 << levels_; }

  /// Fills dw/dwt with fine_per_coarse() rows of bonds() increments each
  /// (row-major) for the given coarse step.
  void generate(std::uint64_t coarse_step, std::vector<double>& dw, std::vector<double>& dwt) const;

 private:
  void generate_family(std::uint64_t coarse_step, std::uint32_t family, std::vector<double>& out) const;

  std::uint64_t seed_;
  int bonds_;
  double coarse_dt_;
  int levels_;
  mutable std::vector<double> scratch_;
};

/// Running energy/work/heat bookkeeping for one trajectory.
struct Ledger
{
  double E0 = 0.0;   ///< energy at t = 0
  double E = 0.0;    ///< current E_N
  double W = 0.0;    ///< work, sum tau_bar dL_N
  double Q_p = 0.0;  ///< momentum-noise heat (drift part)
  double Q_r = 0.0;  ///< strain-noise heat (drift part)
  double M_p = 0.0;  ///< momentum-noise martingale part
  double M_r = 0.0;  ///< strain-noise martingale part

  double heat() const noexcept { return Q_p + Q_r + M_p + M_r; }
  /// E(t) - E(0) - W(t) - Q(t)
  double first_law_residual() const noexcept { return E - E0 - W - heat(); }
};

struct LedgerDelta
{
  double W = 0.0;
  double Q_p = 0.0;
  double Q_r = 0.0;
  double M_p = 0.0;
  double M_r = 0.0;
  double E_after = 0.0;
};

/// Ledger increments for the step before -> after driven by `noise` over dt.
///
/// Q_p = -sigma sum((grad p)^2 - 2/beta) dt and
/// Q_r = -sigma sum((grad V')^2) dt + (sigma/beta) sum_i V''(r_i) n_i dt, where n_i
/// counts the noise columns acting on site i. M_p, M_r hold the stochastic
/// integrals plus the realized-minus-expected quadratic variation.
LedgerDelta accumulate_ledger(const ChainState& before, const ChainState& after, double tau_bar,
                              const ChainConfig& config, const thermo::ThermoModel& model,
                              const NoiseIncrements& noise, double dt);

/// One Euler-Maruyama step of length dt with the given increments.
/// Throws BlowUpError (with `step_index`) if the new state is not finite.
ChainState step(const ChainState& state, const ChainConfig& config, const thermo::ThermoModel& model,
                const NoiseIncrements& noise, double dt, long long step_index = 0);

/// i.i.d. sample of lambda^N_{beta, 0, tau0}.
ChainState make_initial_state(const ChainConfig& config, const thermo::ThermoModel& model,
                              double tau0);

struct LedgerRecord
{
  double t;
  Ledger ledger;
};

struct Trajectory
{
  std::vector<ChainState> snapshots;  ///< one per record time
  std::vector<LedgerRecord> ledger;   ///< one per record time
  Ledger final_ledger;
  long long steps = 0;
};

using ProgressFn = std::function<void(double fraction)>;

/// Integrates from make_initial_state(config, model, tau0) to t_end.
Trajectory run_trajectory(const ChainConfig& config, const thermo::ThermoModel& model, double tau0,
                          const ProgressFn& progress = {});

/// Same, from a caller-supplied initial state.
Trajectory run_trajectory_from(const ChainConfig& config, const thermo::ThermoModel& model,
                               ChainState initial, const ProgressFn& progress = {});

}  // namespace hydrochain::micro
