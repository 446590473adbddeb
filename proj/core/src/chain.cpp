#include "hydrochain/chain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "hydrochain/error.hpp"
#include "hydrochain/philox.hpp"

namespace hydrochain::micro {

namespace {

constexpr std::uint32_t kInitialStream = 0x1u;
constexpr std::uint32_t kFamilyMomentum = 0x1u;
constexpr std::uint32_t kFamilyStrain = 0x2u;

// Noise columns touching site k: one at either end of the chain, two inside.
inline double columns(int k, int N) noexcept
{
  return (k == 0 || k == N - 1) ? 1.0 : 2.0;
}

struct SiteDrift
{
  double dr;
  double dp;
};

// Drift of site k (0-based) given forces f = V'(r). `ham` scales the
// Hamiltonian part (N), `visc` the noise drift (N sigma).
inline SiteDrift site_drift(int k, int N, const double* p, const double* f, double tau_bar,
                            double ham, double visc) noexcept
{
  const double p_left = k > 0 ? p[k - 1] : 0.0;  // wall p_0 = 0
  const double f_left = k > 0 ? f[k - 1] : 0.0;
  const double dr_h = ham * (p[k] - p_left);
  const double dp_h = k == N - 1 ? ham * (tau_bar - f[k]) : ham * (f[k + 1] - f[k]);
  double lap_f, lap_p;
  if (k == 0) {
    lap_f = f[1] - f[0];
    lap_p = p[1] - p[0];
  } else if (k == N - 1) {
    lap_f = f_left - f[k];
    lap_p = p_left - p[k];
  } else {
    lap_f = f[k + 1] + f_left - 2.0 * f[k];
    lap_p = p[k + 1] + p_left - 2.0 * p[k];
  }
  return {dr_h + visc * lap_f, dp_h + visc * lap_p};
}

// Fused Euler-Maruyama update plus ledger increments. `force` and `curv` are
// scratch buffers of size N. Writes the new state into `out` (may not alias `in`).
LedgerDelta advance(const ChainState& in, ChainState& out, double tau_bar, const ChainConfig& cfg,
                    const thermo::ThermoModel& model, const double* dw, const double* dwt, double dt,
                    std::vector<double>& force, std::vector<double>& curv)
{
  const int N = in.size();
  const double Nd = static_cast<double>(N);
  const double sigma = cfg.sigma;
  const double beta = model.beta();
  const auto& pot = model.potential();
  const double* r = in.r.data();
  const double* p = in.p.data();
  double* r_new = out.r.data();
  double* p_new = out.p.data();

  for (int k = 0; k < N; ++k) {
    force[k] = thermo::potential_force(pot, r[k]);
    curv[k] = thermo::potential_curvature(pot, r[k]);
  }
  const double* f = force.data();

  const double ham = cfg.hamiltonian ? Nd : 0.0;
  const double visc = cfg.noise_drift ? Nd * sigma : 0.0;
  const double amp = cfg.noise ? std::sqrt(2.0 * Nd * sigma / beta) : 0.0;

  LedgerDelta d{};
  double sum_gp2 = 0.0, sum_gf2 = 0.0, mart_p = 0.0, mart_r = 0.0;
  double qv_p = 0.0, qv_r = 0.0, curv_cols = 0.0;

  for (int k = 0; k < N; ++k) {
    const SiteDrift sd = site_drift(k, N, p, f, tau_bar, ham, visc);
    const double w_in = k > 0 ? dw[k - 1] : 0.0;
    const double w_out = k < N - 1 ? dw[k] : 0.0;
    const double wt_in = k > 0 ? dwt[k - 1] : 0.0;
    const double wt_out = k < N - 1 ? dwt[k] : 0.0;
    const double xi_p = amp * (w_in - w_out);
    const double xi_r = amp * (wt_in - wt_out);

    r_new[k] = r[k] + sd.dr * dt + xi_r;
    p_new[k] = p[k] + sd.dp * dt + xi_p;

    const double n_k = columns(k, N);
    const double expected = amp * amp * n_k * dt;
    qv_p += xi_p * xi_p - expected;
    qv_r += curv[k] * (xi_r * xi_r - expected);
    curv_cols += curv[k] * n_k;

    if (k < N - 1) {
      const double gp = p[k + 1] - p[k];
      const double gf = f[k + 1] - f[k];
      sum_gp2 += gp * gp;
      sum_gf2 += gf * gf;
      mart_p += gp * dw[k];
      mart_r += gf * dwt[k];
    }
  }
  out.t = in.t + dt;

  const double bonds = static_cast<double>(N - 1);
  const double mart_scale = cfg.noise ? std::sqrt(2.0 * sigma / (beta * Nd)) : 0.0;
  // The noise drift and the noise itself only enter the heat when switched on.
  if (cfg.noise_drift) {
    d.Q_p = -sigma * sum_gp2 * dt;
    d.Q_r = -sigma * sum_gf2 * dt;
  }
  if (cfg.noise) {
    d.Q_p += sigma * 2.0 * bonds / beta * dt;
    d.Q_r += sigma / beta * curv_cols * dt;
    d.M_p = mart_scale * mart_p + qv_p / (2.0 * Nd);
    d.M_r = mart_scale * mart_r + qv_r / (2.0 * Nd);
  }
  d.W = tau_bar * (out.length() - in.length());
  d.E_after = chain_energy(out, pot);
  return d;
}

}  // namespace

double default_sigma(int N, double exponent)
{
  return std::ceil(std::pow(static_cast<double>(N), exponent));
}

void ChainConfig::resolve_defaults()
{
  if (!(sigma > 0.0)) sigma = default_sigma(N);
  if (!(dt > 0.0)) dt = kDefaultTheta / (static_cast<double>(N) * sigma);
}

double ChainConfig::fine_dt() const noexcept
{
  return std::ldexp(dt, -refinement);
}

void ChainConfig::validate() const
{
  if (N < 2) throw ConfigError(fmt::format("N = {} must be at least 2", N));
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw ConfigError(fmt::format("sigma = {} must be positive", sigma));
  }
  if (!(dt > 0.0)) throw ConfigError(fmt::format("dt = {} must be positive", dt));
  const double theta = dt * N * sigma;
  if (theta > kMaxTheta * (1.0 + 1e-12)) {
    throw ConfigError(fmt::format(
        "dt = {} violates the explicit stability bound dt <= {}/(N sigma) = {} (theta = {})", dt,
        kMaxTheta, kMaxTheta / (N * sigma), theta));
  }
  if (!(t_end > 0.0)) throw ConfigError(fmt::format("t_end = {} must be positive", t_end));
  if (refinement < 0 || refinement > 12) {
    throw ConfigError(fmt::format("refinement = {} must lie in [0, 12]", refinement));
  }
  for (double t : record_times) {
    if (!(t >= 0.0 && t <= t_end * (1.0 + 1e-12))) {
      throw ConfigError(fmt::format("record time {} outside [0, t_end = {}]", t, t_end));
    }
  }
  if (!std::is_sorted(record_times.begin(), record_times.end())) {
    throw ConfigError("record_times must be sorted");
  }
  schedule.validate();
}

std::vector<std::string> ChainConfig::warnings() const
{
  std::vector<std::string> out;
  if (sigma / N >= 1.0) {
    out.push_back(fmt::format("sigma/N = {} >= 1: noise does not vanish on the macroscopic scale", sigma / N));
  }
  if (N / (sigma * sigma) >= 1.0) {
    out.push_back(fmt::format("N/sigma^2 = {} >= 1: noise too weak for local equilibrium", N / (sigma * sigma)));
  }
  return out;
}

double ChainState::length() const noexcept
{
  return std::accumulate(r.begin(), r.end(), 0.0) / static_cast<double>(r.size());
}

double ChainState::momentum() const noexcept
{
  return std::accumulate(p.begin(), p.end(), 0.0) / static_cast<double>(p.size());
}

double chain_energy(const ChainState& state, const thermo::PotentialParams& potential)
{
  double e = 0.0;
  for (int k = 0; k < state.size(); ++k) {
    e += 0.5 * state.p[k] * state.p[k] + thermo::potential_energy(potential, state.r[k]);
  }
  return e / static_cast<double>(state.size());
}

Drift drift(const ChainState& state, double tau_bar, const ChainConfig& config,
            const thermo::ThermoModel& model)
{
  const int N = state.size();
  std::vector<double> force(N);
  for (int k = 0; k < N; ++k) force[k] = thermo::potential_force(model.potential(), state.r[k]);
  const double Nd = static_cast<double>(N);
  const double ham = config.hamiltonian ? Nd : 0.0;
  const double visc = config.noise_drift ? Nd * config.sigma : 0.0;
  Drift d{std::vector<double>(N), std::vector<double>(N)};
  for (int k = 0; k < N; ++k) {
    const SiteDrift sd = site_drift(k, N, state.p.data(), force.data(), tau_bar, ham, visc);
    d.dr[k] = sd.dr;
    d.dp[k] = sd.dp;
  }
  return d;
}

BrownianIncrements::BrownianIncrements(std::uint64_t seed, int bonds, double coarse_dt, int levels)
    : seed_(seed), bonds_(bonds), coarse_dt_(coarse_dt), levels_(levels)
{
  if (bonds < 1) throw ConfigError("BrownianIncrements: need at least one bond");
  if (levels < 0 || levels > 12) throw ConfigError("BrownianIncrements: levels must lie in [0, 12]");
}

void BrownianIncrements::generate(std::uint64_t coarse_step, std::vector<double>& dw,
                                  std::vector<double>& dwt) const
{
  generate_family(coarse_step, kFamilyMomentum, dw);
  generate_family(coarse_step, kFamilyStrain, dwt);
}

void BrownianIncrements::generate_family(std::uint64_t coarse_step, std::uint32_t family,
                                         std::vector<double>& out) const
{
  const auto key = rng::Philox4x32::key_from_seed(seed_);
  const auto lo = static_cast<std::uint32_t>(coarse_step);
  const auto hi = static_cast<std::uint32_t>(coarse_step >> 32);
  const int B = bonds_;
  const int pairs = (B + 1) / 2;

  // Fills dst[0..B) with standard normals for tree node (level, node).
  const auto normals = [&](std::uint32_t level, std::uint32_t node, double* dst) {
    const std::uint32_t tag = (family << 28) | (level << 24) | node;
    for (int j = 0; j < pairs; ++j) {
      const auto z = rng::normal_pair({static_cast<std::uint32_t>(j), tag, lo, hi}, key);
      dst[2 * j] = z[0];
      if (2 * j + 1 < B) dst[2 * j + 1] = z[1];
    }
  };

  const int rows = 1 << levels_;
  out.resize(static_cast<std::size_t>(rows) * B);
  scratch_.resize(static_cast<std::size_t>(rows) * B);

  // Level 0: the coarse increment.
  normals(0, 0, out.data());
  const double s0 = std::sqrt(coarse_dt_);
  for (int b = 0; b < B; ++b) out[b] *= s0;

  // Bisection: given the sum S over an interval of length h, the left half is
  // N(S/2, h/4) and the right half is S minus the left half.
  std::vector<double> z(B);
  double h = coarse_dt_;
  for (int level = 1; level <= levels_; ++level) {
    const int parents = 1 << (level - 1);
    const double half_sd = 0.5 * std::sqrt(h);
    for (int k = 0; k < parents; ++k) {
      normals(static_cast<std::uint32_t>(level), static_cast<std::uint32_t>(k), z.data());
      const double* parent = out.data() + static_cast<std::size_t>(k) * B;
      double* left = scratch_.data() + static_cast<std::size_t>(2 * k) * B;
      double* right = left + B;
      for (int b = 0; b < B; ++b) {
        left[b] = 0.5 * parent[b] + half_sd * z[b];
        right[b] = parent[b] - left[b];
      }
    }
    std::copy(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(2 * parents) * B,
              out.begin());
    h *= 0.5;
  }
}

LedgerDelta accumulate_ledger(const ChainState& before, const ChainState& after, double tau_bar,
                              const ChainConfig& config, const thermo::ThermoModel& model,
                              const NoiseIncrements& noise, double dt)
{
  // Recompute the step from `before`; the heat terms are functions of the
  // pre-step state and the increments, the work and energy of `after`.
  const int N = before.size();
  ChainState scratch{std::vector<double>(N), std::vector<double>(N), 0.0};
  std::vector<double> force(N), curv(N);
  LedgerDelta d = advance(before, scratch, tau_bar, config, model, noise.dw.data(), noise.dwt.data(),
                          dt, force, curv);
  d.W = tau_bar * (after.length() - before.length());
  d.E_after = chain_energy(after, model.potential());
  return d;
}

ChainState step(const ChainState& state, const ChainConfig& config, const thermo::ThermoModel& model,
                const NoiseIncrements& noise, double dt, long long step_index)
{
  const int N = state.size();
  if (static_cast<int>(noise.dw.size()) != N - 1 || static_cast<int>(noise.dwt.size()) != N - 1) {
    throw ConfigError("step: noise increments must have N-1 entries per family");
  }
  ChainState out{std::vector<double>(N), std::vector<double>(N), 0.0};
  std::vector<double> force(N), curv(N);
  const LedgerDelta d = advance(state, out, config.schedule(state.t), config, model, noise.dw.data(),
                                noise.dwt.data(), dt, force, curv);
  if (!std::isfinite(d.E_after)) {
    throw BlowUpError(fmt::format("chain blew up at step {} (t = {})", step_index, out.t), step_index,
                      out.t);
  }
  return out;
}

ChainState make_initial_state(const ChainConfig& config, const thermo::ThermoModel& model, double tau0)
{
  const auto samples = thermo::sample_canonical(model, 0.0, tau0, static_cast<std::size_t>(config.N),
                                                config.seed, kInitialStream);
  ChainState s;
  s.r.resize(samples.size());
  s.p.resize(samples.size());
  for (std::size_t k = 0; k < samples.size(); ++k) {
    s.r[k] = samples[k].r;
    s.p[k] = samples[k].p;
  }
  s.t = 0.0;
  return s;
}

Trajectory run_trajectory(const ChainConfig& config, const thermo::ThermoModel& model, double tau0,
                          const ProgressFn& progress)
{
  ChainConfig cfg = config;
  cfg.resolve_defaults();
  cfg.validate();
  return run_trajectory_from(cfg, model, make_initial_state(cfg, model, tau0), progress);
}

Trajectory run_trajectory_from(const ChainConfig& config, const thermo::ThermoModel& model,
                               ChainState initial, const ProgressFn& progress)
{
  ChainConfig cfg = config;
  cfg.resolve_defaults();
  cfg.validate();
  if (initial.size() != cfg.N || static_cast<int>(initial.p.size()) != cfg.N) {
    throw ConfigError(fmt::format("initial state has {} sites, config N = {}", initial.size(), cfg.N));
  }
  for (const auto& w : cfg.warnings()) spdlog::warn("chain config: {}", w);

  const int N = cfg.N;
  const double h = cfg.fine_dt();
  const long long total = static_cast<long long>(std::ceil(cfg.t_end / h - 1e-9));
  const int per_coarse = 1 << cfg.refinement;

  std::vector<long long> record_steps;
  record_steps.reserve(cfg.record_times.size());
  for (double t : cfg.record_times) {
    record_steps.push_back(std::min(total, static_cast<long long>(std::llround(t / h))));
  }

  Trajectory traj;
  traj.snapshots.reserve(record_steps.size());
  traj.ledger.reserve(record_steps.size());

  ChainState cur = std::move(initial);
  cur.t = 0.0;
  ChainState next{std::vector<double>(N), std::vector<double>(N), 0.0};
  std::vector<double> force(N), curv(N), dw, dwt;

  Ledger ledger;
  ledger.E0 = chain_energy(cur, model.potential());
  ledger.E = ledger.E0;

  std::size_t rec = 0;
  const auto record = [&](long long n) {
    while (rec < record_steps.size() && record_steps[rec] == n) {
      traj.snapshots.push_back(cur);
      traj.ledger.push_back({cur.t, ledger});
      ++rec;
    }
  };
  record(0);

  const BrownianIncrements noise(cfg.seed, N - 1, cfg.dt, cfg.refinement);
  const long long report_every = std::max<long long>(1, total / 10);
  long long n = 0;
  for (std::uint64_t coarse = 0; n < total; ++coarse) {
    noise.generate(coarse, dw, dwt);
    for (int j = 0; j < per_coarse && n < total; ++j, ++n) {
      const double t_n = static_cast<double>(n) * h;
      cur.t = t_n;
      const double tau_bar = cfg.schedule(t_n);
      const LedgerDelta d = advance(cur, next, tau_bar, cfg, model,
                                    dw.data() + static_cast<std::size_t>(j) * (N - 1),
                                    dwt.data() + static_cast<std::size_t>(j) * (N - 1), h, force, curv);
      if (!std::isfinite(d.E_after)) {
        throw BlowUpError(fmt::format("chain blew up at step {} (t = {})", n + 1, t_n + h), n + 1,
                          t_n + h);
      }
      ledger.W += d.W;
      ledger.Q_p += d.Q_p;
      ledger.Q_r += d.Q_r;
      ledger.M_p += d.M_p;
      ledger.M_r += d.M_r;
      ledger.E = d.E_after;
      std::swap(cur, next);
      cur.t = static_cast<double>(n + 1) * h;
      record(n + 1);
      if (((n + 1) % report_every) == 0) {
        const double frac = static_cast<double>(n + 1) / static_cast<double>(total);
        if (progress) progress(frac);
        spdlog::debug("chain N={} t={:.4f} ({:.0f}%) residual={:.3e}", N, cur.t, 100 * frac,
                      ledger.first_law_residual());
      }
    }
  }
  traj.final_ledger = ledger;
  traj.steps = total;
  return traj;
}

}  // namespace hydrochain::micro
