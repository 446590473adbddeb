#include "hydrochain/potential.hpp"

#include <cmath>

#include <fmt/format.h>

#include "hydrochain/error.hpp"

namespace hydrochain::thermo {

void PotentialParams::validate() const
{
  if (!(kappa >= 0.0 && kappa < 1.0 / 3.0)) {
    throw ConfigError(fmt::format(
        "kappa = {} violates the constraint kappa in (0, 1/3) (kappa = 0 allowed as harmonic case)",
        kappa));
  }
  if (!(moll_width > 0.0) || !std::isfinite(moll_width)) {
    throw ConfigError(fmt::format("moll_width = {} must be a positive finite number", moll_width));
  }
}

PotentialValue eval_potential(const PotentialParams& params, double r)
{
  if (!std::isfinite(r)) {
    throw DomainError(fmt::format("eval_potential: non-finite strain {}", r));
  }
  return {potential_energy(params, r), potential_force(params, r), potential_curvature(params, r)};
}

}  // namespace hydrochain::thermo
