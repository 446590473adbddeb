#pragma once

#include <cstdint>
#include <vector>

#include "hydrochain/potential.hpp"

namespace hydrochain::thermo {

/// Moments of the one-site canonical strain marginal
/// exp(-beta V(r) + beta tau r - G) dr, all computed by quadrature.
struct CanonicalMoments
{
  double log_partition;  ///< G(beta, tau)
  double mean_strain;    ///< rho(beta, tau) = E[r]
  double strain_variance;
  double mean_potential;  ///< E[V(r)]
  double mean_force;      ///< E[V'(r)], equals tau
};

/// Canonical thermodynamics of the chain at fixed inverse temperature.
///
/// Every method is a pure function of (model, argument); the class holds no
/// caches, so a single instance may be shared across threads.
class ThermoModel
{
 public:
  /// Default quadrature truncation: integrand below exp(-72) of its peak,
  /// i.e. a window of 12 standard deviations of the Gaussian envelope.
  static constexpr double kDefaultQuadTol = 5.380186160021138e-32;

  ThermoModel(double beta, PotentialParams potential, double quad_tol = kDefaultQuadTol);

  double beta() const noexcept { return beta_; }
  const PotentialParams& potential() const noexcept { return potential_; }
  double quad_tol() const noexcept { return quad_tol_; }
  double c1() const noexcept { return c1_; }
  double c2() const noexcept { return c2_; }

  /// Maximizer r* of tau r - V(r), i.e. V'(r*) = tau.
  double peak_strain(double tau) const;

  /// G(beta, tau) = log int exp(-beta V(r) + beta tau r) dr.
  double log_partition(double tau) const;

  /// rho(beta, tau) = E[r] under the canonical strain marginal.
  double mean_strain(double tau) const;

  /// U(beta, tau) = 1/(2 beta) + E[V(r)].
  double internal_energy(double tau) const;

  CanonicalMoments moments(double tau) const;

  /// tau_beta(rho): inverse of mean_strain, by safeguarded Newton.
  double tension_of_strain(double rho) const;

  /// F(beta, rho) = tau rho - G(beta, tau) / beta at tau = tau_beta(rho).
  double free_energy(double rho) const;

  /// Central finite differences (step 1e-4) of tension_of_strain.
  double tension_slope(double rho) const;
  double tension_curvature(double rho) const;

  /// Entropy S = beta (U - F) of the equilibrium state at tension tau.
  double entropy(double tau) const;

 private:
  double window_half_width() const noexcept;

  double beta_;
  PotentialParams potential_;
  double quad_tol_;
  double c1_;
  double c2_;
};

/// One draw from lambda_{beta, pbar, tau}.
struct GibbsSample
{
  double r;
  double p;
};

/// i.i.d. draws from the canonical product measure. Momentum is exactly
/// Gaussian; strain uses rejection from N(r*, 1/(beta c1)), whose envelope
/// dominates the log-concave target because V'' >= c1.
/// Deterministic in (seed, stream): sample k only reads counters tagged with k.
std::vector<GibbsSample> sample_canonical(const ThermoModel& model, double pbar, double tau,
                                          std::size_t n, std::uint64_t seed,
                                          std::uint32_t stream = 0);

}  // namespace hydrochain::thermo
