#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "hydrochain/thermo.hpp"

namespace hydrochain::thermo {

/// Interpolated view of a ThermoModel for hot loops.
///
/// Nodes are placed uniformly in tension; each node stores rho, the strain
/// variance and G from the exact quadrature path. Because d rho / d tau =
/// beta Var(r), every interpolant below is cubic Hermite with exact slopes.
/// Queries outside the tabulated range fall back to the exact model.
class ThermoTable
{
 public:
  explicit ThermoTable(const ThermoModel& model, double tau_min = -12.0, double tau_max = 12.0,
                       double tau_step = 0.01);

  const ThermoModel& model() const noexcept { return model_; }

  double tension(double rho) const;
  double tension_slope(double rho) const;
  double strain_of_tension(double tau) const;
  double free_energy(double rho) const;

  /// Vectorized tension for a field of strains.
  void tension(std::span<const double> rho, std::span<double> out) const;

  double rho_min() const noexcept { return rho_.front(); }
  double rho_max() const noexcept { return rho_.back(); }

 private:
  std::size_t locate_rho(double rho) const;

  ThermoModel model_;
  double tau_min_;
  double tau_step_;
  std::vector<double> tau_;
  std::vector<double> rho_;
  std::vector<double> drho_;  // d rho / d tau
  std::vector<double> free_;
};

/// Row of the exported thermodynamic table.
struct ThermoTableRow
{
  double rho;
  double tau;
  double free_energy;
  double internal_energy;
  double tau_prime;
  double tau_second;
};

std::vector<ThermoTableRow> thermo_table_rows(const ThermoModel& model, double rho_min,
                                              double rho_max, double rho_step);

/// CSV with header rho,tau,F,U,tau_prime,tau_second.
void write_thermo_table_csv(std::ostream& out, std::span<const ThermoTableRow> rows);

}  // namespace hydrochain::thermo
