#pragma once

namespace hydrochain::thermo {

/// Parameters of the anharmonic spring potential.
///
/// V is a C^3 smoothing of r -> (1-kappa) r^2/2 + kappa r |r|_+ / 2: its second
/// derivative is (1-kappa) + kappa * s(r/h) with the cubic smoothstep
/// s(x) = (3x - x^3 + 2)/4 on [-1,1], so that 1-kappa <= V'' <= 1 everywhere.
struct PotentialParams
{
  double kappa = 0.25;
  double moll_width = 0.1;

  /// Throws ConfigError unless 0 <= kappa < 1/3 and moll_width > 0.
  /// kappa = 0 is accepted as the harmonic reference case.
  void validate() const;

  double c1() const noexcept { return 1.0 - kappa; }
  double c2() const noexcept { return 1.0; }
};

struct PotentialValue
{
  double V;
  double dV;
  double d2V;
};

/// V, V', V'' at r. Throws DomainError for non-finite r.
PotentialValue eval_potential(const PotentialParams& params, double r);

/// Unchecked fast paths used in the particle update loops.
inline double potential_force(const PotentialParams& params, double r) noexcept
{
  const double h = params.moll_width;
  const double k = params.kappa;
  if (r >= h) return r;
  if (r <= -h) return (1.0 - k) * r;
  const double x = r / h;
  const double x2 = x * x;
  const double S = (1.5 * x2 - 0.25 * x2 * x2 + 2.0 * x) * 0.25 + 0.1875;
  return (1.0 - k) * r + k * h * S;
}

inline double potential_curvature(const PotentialParams& params, double r) noexcept
{
  const double h = params.moll_width;
  const double k = params.kappa;
  if (r >= h) return 1.0;
  if (r <= -h) return 1.0 - k;
  const double x = r / h;
  return (1.0 - k) + k * (3.0 * x - x * x * x + 2.0) * 0.25;
}

inline double potential_energy(const PotentialParams& params, double r) noexcept
{
  const double h = params.moll_width;
  const double k = params.kappa;
  if (r <= -h) return 0.5 * (1.0 - k) * r * r;
  if (r >= h) return 0.5 * r * r + 0.1 * k * h * h;
  const double x = r / h;
  const double x2 = x * x;
  const double T = (0.5 * x2 * x - 0.05 * x2 * x2 * x + x2) * 0.25 + 0.1875 * x + 0.05;
  return 0.5 * (1.0 - k) * r * r + k * h * h * T;
}

}  // namespace hydrochain::thermo
