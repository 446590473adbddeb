#include "hydrochain/thermo_table.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>

#include "hydrochain/error.hpp"

namespace hydrochain::thermo {

namespace {

struct Hermite
{
  double value;
  double slope;
};

// Cubic Hermite on [x0, x1] with end values/slopes.
Hermite hermite(double x, double x0, double x1, double f0, double f1, double d0, double d1)
{
  const double h = x1 - x0;
  const double s = (x - x0) / h;
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1;
  const double h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2;
  const double h11 = s3 - s2;
  const double value = h00 * f0 + h10 * h * d0 + h01 * f1 + h11 * h * d1;
  const double dh00 = (6 * s2 - 6 * s) / h;
  const double dh10 = 3 * s2 - 4 * s + 1;
  const double dh01 = (-6 * s2 + 6 * s) / h;
  const double dh11 = 3 * s2 - 2 * s;
  const double slope = dh00 * f0 + dh10 * d0 + dh01 * f1 + dh11 * d1;
  return {value, slope};
}

}  // namespace

ThermoTable::ThermoTable(const ThermoModel& model, double tau_min, double tau_max, double tau_step)
    : model_(model), tau_min_(tau_min), tau_step_(tau_step)
{
  if (!(tau_max > tau_min) || !(tau_step > 0.0)) {
    throw ConfigError("ThermoTable: need tau_max > tau_min and tau_step > 0");
  }
  const auto n = static_cast<std::size_t>(std::llround((tau_max - tau_min) / tau_step)) + 1;
  tau_.resize(n);
  rho_.resize(n);
  drho_.resize(n);
  free_.resize(n);
  const double beta = model_.beta();
  for (std::size_t k = 0; k < n; ++k) {
    const double tau = tau_min + tau_step * static_cast<double>(k);
    const CanonicalMoments m = model_.moments(tau);
    tau_[k] = tau;
    rho_[k] = m.mean_strain;
    drho_[k] = beta * m.strain_variance;
    free_[k] = tau * m.mean_strain - m.log_partition / beta;
  }
  for (std::size_t k = 1; k < n; ++k) {
    if (!(rho_[k] > rho_[k - 1])) {
      throw NumericalError(fmt::format("ThermoTable: rho(tau) not increasing near tau = {}", tau_[k]));
    }
  }
}

std::size_t ThermoTable::locate_rho(double rho) const
{
  const auto it = std::upper_bound(rho_.begin(), rho_.end(), rho);
  const auto k = static_cast<std::size_t>(it - rho_.begin());
  return std::clamp<std::size_t>(k, 1, rho_.size() - 1) - 1;
}

double ThermoTable::tension(double rho) const
{
  if (!(rho >= rho_.front() && rho <= rho_.back())) {
    if (!std::isfinite(rho)) throw DomainError(fmt::format("tension: non-finite strain {}", rho));
    return model_.tension_of_strain(rho);
  }
  const std::size_t k = locate_rho(rho);
  return hermite(rho, rho_[k], rho_[k + 1], tau_[k], tau_[k + 1], 1.0 / drho_[k], 1.0 / drho_[k + 1])
      .value;
}

void ThermoTable::tension(std::span<const double> rho, std::span<double> out) const
{
  for (std::size_t i = 0; i < rho.size(); ++i) out[i] = tension(rho[i]);
}

double ThermoTable::tension_slope(double rho) const
{
  if (!(rho >= rho_.front() && rho <= rho_.back())) return model_.tension_slope(rho);
  const std::size_t k = locate_rho(rho);
  return hermite(rho, rho_[k], rho_[k + 1], tau_[k], tau_[k + 1], 1.0 / drho_[k], 1.0 / drho_[k + 1])
      .slope;
}

double ThermoTable::strain_of_tension(double tau) const
{
  const double pos = (tau - tau_min_) / tau_step_;
  if (!(pos >= 0.0 && pos <= static_cast<double>(tau_.size() - 1))) {
    if (!std::isfinite(tau)) throw DomainError(fmt::format("strain_of_tension: non-finite {}", tau));
    return model_.mean_strain(tau);
  }
  const auto k = std::min(static_cast<std::size_t>(pos), tau_.size() - 2);
  return hermite(tau, tau_[k], tau_[k + 1], rho_[k], rho_[k + 1], drho_[k], drho_[k + 1]).value;
}

double ThermoTable::free_energy(double rho) const
{
  if (!(rho >= rho_.front() && rho <= rho_.back())) {
    if (!std::isfinite(rho)) throw DomainError(fmt::format("free_energy: non-finite strain {}", rho));
    return model_.free_energy(rho);
  }
  const std::size_t k = locate_rho(rho);
  return hermite(rho, rho_[k], rho_[k + 1], free_[k], free_[k + 1], tau_[k], tau_[k + 1]).value;
}

std::vector<ThermoTableRow> thermo_table_rows(const ThermoModel& model, double rho_min,
                                              double rho_max, double rho_step)
{
  if (!(rho_max >= rho_min) || !(rho_step > 0.0)) {
    throw ConfigError("thermo table: need rho_max >= rho_min and rho_step > 0");
  }
  std::vector<ThermoTableRow> rows;
  const auto n = static_cast<std::size_t>(std::floor((rho_max - rho_min) / rho_step + 1e-9)) + 1;
  rows.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double rho = rho_min + rho_step * static_cast<double>(k);
    const double tau = model.tension_of_strain(rho);
    ThermoTableRow row{};
    row.rho = rho;
    row.tau = tau;
    row.free_energy = tau * rho - model.log_partition(tau) / model.beta();
    row.internal_energy = model.internal_energy(tau);
    row.tau_prime = model.tension_slope(rho);
    row.tau_second = model.tension_curvature(rho);
    rows.push_back(row);
  }
  return rows;
}

void write_thermo_table_csv(std::ostream& out, std::span<const ThermoTableRow> rows)
{
  out << "rho,tau,F,U,tau_prime,tau_second\n";
  for (const auto& row : rows) {
    out << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", row.rho, row.tau,
                       row.free_energy, row.internal_energy, row.tau_prime, row.tau_second);
  }
}

}  // namespace hydrochain::thermo
