#include "hydrochain/thermo.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fmt/format.h>

#include "hydrochain/error.hpp"

namespace hydrochain::thermo {

namespace {

constexpr double kFiniteDiffStep = 1e-4;
constexpr int kMaxNewton = 50;

void require_finite(double x, const char* what)
{
  if (!std::isfinite(x)) throw DomainError(fmt::format("{}: non-finite argument {}", what, x));
}

// Adaptive G7K15 on [a, b]; throws if the error estimate is not small relative
// to the integral's scale.
template <class F>
double integrate_piece(F&& f, double a, double b, double scale)
{
  using boost::math::quadrature::gauss_kronrod;
  double err = 0.0;
  const double value = gauss_kronrod<double, 15>::integrate(f, a, b, 15, 1e-12, &err);
  if (!std::isfinite(value) || err > 1e-10 * std::max(1.0, scale)) {
    throw NumericalError(fmt::format(
        "quadrature did not converge on [{}, {}]: value {}, error estimate {}", a, b, value, err));
  }
  return value;
}

}  // namespace

ThermoModel::ThermoModel(double beta, PotentialParams potential, double quad_tol)
    : beta_(beta), potential_(potential), quad_tol_(quad_tol), c1_(potential.c1()), c2_(potential.c2())
{
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw ConfigError(fmt::format("beta = {} must be positive and finite", beta));
  }
  if (!(quad_tol > 0.0 && quad_tol < 1.0)) {
    throw ConfigError(fmt::format("quad_tol = {} must lie in (0, 1)", quad_tol));
  }
  potential_.validate();

  // c1 <= V'' <= c2 on a grid that resolves the mollification band.
  const double h = potential_.moll_width;
  const double span = 10.0 * std::max(1.0, h);
  const int n = 20001;
  for (int k = 0; k < n; ++k) {
    const double r = -span + 2.0 * span * k / (n - 1);
    const double v2 = potential_curvature(potential_, r);
    if (v2 < c1_ - 1e-14 || v2 > c2_ + 1e-14) {
      throw NumericalError(fmt::format("V''({}) = {} outside [{}, {}]", r, v2, c1_, c2_));
    }
  }
}

double ThermoModel::window_half_width() const noexcept
{
  return std::sqrt(-2.0 * std::log(quad_tol_) / (beta_ * c1_));
}

double ThermoModel::peak_strain(double tau) const
{
  require_finite(tau, "peak_strain");
  const double h = potential_.moll_width;
  if (tau >= h) return tau;
  if (tau <= -c1_ * h) return tau / c1_;
  // V' is strictly increasing on [-h, h]; Newton from the linear guess with
  // bisection fallback.
  double lo = -h;
  double hi = h;
  double r = std::clamp(tau / (0.5 * (1.0 + c1_)), lo, hi);
  for (int it = 0; it < 100; ++it) {
    const double g = potential_force(potential_, r) - tau;
    if (std::abs(g) < 1e-15 * std::max(1.0, std::abs(tau))) return r;
    if (g > 0.0) hi = r; else lo = r;
    double next = r - g / potential_curvature(potential_, r);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - r) < 1e-17) return next;
    r = next;
  }
  return r;
}

CanonicalMoments ThermoModel::moments(double tau) const
{
  require_finite(tau, "moments");
  const double rs = peak_strain(tau);
  const double phi_star = potential_energy(potential_, rs) - tau * rs;
  const double w = window_half_width();

  std::array<double, 5> nodes{rs - w, -potential_.moll_width, rs, potential_.moll_width, rs + w};
  std::sort(nodes.begin(), nodes.end());
  std::vector<double> cuts;
  for (double x : nodes) {
    if (x < rs - w || x > rs + w) continue;
    if (cuts.empty() || x > cuts.back()) cuts.push_back(x);
  }

  const auto weight = [&](double r) {
    return std::exp(-beta_ * (potential_energy(potential_, r) - tau * r - phi_star));
  };

  double i0 = 0.0, i1 = 0.0, i2 = 0.0, iv = 0.0, ivp = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double a = cuts[k];
    const double b = cuts[k + 1];
    i0 += integrate_piece(weight, a, b, w);
    i1 += integrate_piece([&](double r) { return (r - rs) * weight(r); }, a, b, w);
    i2 += integrate_piece([&](double r) { return (r - rs) * (r - rs) * weight(r); }, a, b, w);
    // centred exponent psi = V - tau r - phi* >= 0, so E[V] = phi* + E[psi] + tau E[r]
    iv += integrate_piece(
        [&](double r) { return (potential_energy(potential_, r) - tau * r - phi_star) * weight(r); }, a, b, w);
    ivp += integrate_piece([&](double r) { return (potential_force(potential_, r) - tau) * weight(r); },
                           a, b, w);
  }
  if (!(i0 > 0.0)) {
    throw NumericalError(fmt::format("canonical normalization vanished at tau = {}", tau));
  }

  CanonicalMoments m{};
  m.log_partition = -beta_ * phi_star + std::log(i0);
  const double shift = i1 / i0;
  m.mean_strain = rs + shift;
  m.strain_variance = i2 / i0 - shift * shift;
  m.mean_potential = phi_star + iv / i0 + tau * m.mean_strain;
  m.mean_force = tau + ivp / i0;
  return m;
}

double ThermoModel::log_partition(double tau) const
{
  return moments(tau).log_partition;
}

double ThermoModel::mean_strain(double tau) const
{
  return moments(tau).mean_strain;
}

double ThermoModel::internal_energy(double tau) const
{
  return 0.5 / beta_ + moments(tau).mean_potential;
}

double ThermoModel::tension_of_strain(double rho) const
{
  require_finite(rho, "tension_of_strain");
  // rho'(tau) = beta Var(r) lies in [1/c2, 1/c1], so from any anchor (tau0,
  // rho0) the root sits between tau0 + c1 (rho - rho0) and tau0 + c2 (rho - rho0).
  const double tau0 = potential_force(potential_, rho);
  const CanonicalMoments m0 = moments(tau0);
  const double d0 = rho - m0.mean_strain;
  double lo = tau0 + std::min(c1_ * d0, c2_ * d0);
  double hi = tau0 + std::max(c1_ * d0, c2_ * d0);
  const double slack = 1e-12 * std::max(1.0, std::abs(tau0));
  lo -= slack;
  hi += slack;

  double tau = tau0 + d0 / (beta_ * m0.strain_variance);
  tau = std::clamp(tau, lo, hi);
  for (int it = 0; it < 2 * kMaxNewton; ++it) {
    const CanonicalMoments m = moments(tau);
    const double resid = m.mean_strain - rho;
    if (std::abs(resid) <= 1e-12 * std::max(1.0, std::abs(rho))) return tau;
    if (resid > 0.0) hi = tau; else lo = tau;
    double next = tau - resid / (beta_ * m.strain_variance);
    if (it >= kMaxNewton || !(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (hi - lo < 1e-15 * std::max(1.0, std::abs(tau))) return next;
    tau = next;
  }
  const double resid = mean_strain(tau) - rho;
  if (std::abs(resid) > 1e-9) {
    throw NumericalError(fmt::format(
        "tension_of_strain: bracket exhausted at rho = {} (residual {})", rho, resid));
  }
  return tau;
}

double ThermoModel::free_energy(double rho) const
{
  const double tau = tension_of_strain(rho);
  return tau * rho - log_partition(tau) / beta_;
}

double ThermoModel::tension_slope(double rho) const
{
  const double e = kFiniteDiffStep;
  return (tension_of_strain(rho + e) - tension_of_strain(rho - e)) / (2.0 * e);
}

double ThermoModel::tension_curvature(double rho) const
{
  const double e = kFiniteDiffStep;
  return (tension_of_strain(rho + e) - 2.0 * tension_of_strain(rho) + tension_of_strain(rho - e)) /
         (e * e);
}

double ThermoModel::entropy(double tau) const
{
  const CanonicalMoments m = moments(tau);
  const double u = 0.5 / beta_ + m.mean_potential;
  const double f = tau * m.mean_strain - m.log_partition / beta_;
  return beta_ * (u - f);
}

}  // namespace hydrochain::thermo
