#include <cmath>

#include <fmt/format.h>

#include "hydrochain/error.hpp"
#include "hydrochain/philox.hpp"
#include "hydrochain/thermo.hpp"

namespace hydrochain::thermo {

std::vector<GibbsSample> sample_canonical(const ThermoModel& model, double pbar, double tau,
                                          std::size_t n, std::uint64_t seed, std::uint32_t stream)
{
  if (n == 0) throw ConfigError("sample_canonical: n must be at least 1");
  if (!std::isfinite(pbar) || !std::isfinite(tau)) {
    throw DomainError(fmt::format("sample_canonical: non-finite pbar {} or tau {}", pbar, tau));
  }
  const PotentialParams& pot = model.potential();
  const double beta = model.beta();
  const double c1 = model.c1();
  const double rs = model.peak_strain(tau);
  const double phi_star = potential_energy(pot, rs) - tau * rs;
  const double r_scale = 1.0 / std::sqrt(beta * c1);
  const double p_scale = 1.0 / std::sqrt(beta);
  const auto key = rng::Philox4x32::key_from_seed(seed);

  std::vector<GibbsSample> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto lo = static_cast<std::uint32_t>(k);
    const auto hi = static_cast<std::uint32_t>(static_cast<std::uint64_t>(k) >> 32);
    const auto zp = rng::normal_pair({lo, hi, stream, 0xFFFFFFFFu}, key);
    out[k].p = pbar + p_scale * zp[0];

    // phi(r) - phi(r*) >= c1 (r - r*)^2 / 2, so the acceptance ratio below is <= 1.
    for (std::uint32_t attempt = 0;; ++attempt) {
      const auto z = rng::normal_pair({lo, hi, stream, 2 * attempt}, key);
      const auto u = rng::uniform_pair({lo, hi, stream, 2 * attempt + 1}, key);
      const double d = r_scale * z[0];
      const double r = rs + d;
      const double excess = potential_energy(pot, r) - tau * r - phi_star - 0.5 * c1 * d * d;
      if (std::log(u[0]) <= -beta * excess) {
        out[k].r = r;
        break;
      }
      if (attempt > 100000) {
        throw NumericalError("sample_canonical: rejection sampler failed to accept");
      }
    }
  }
  return out;
}

}  // namespace hydrochain::thermo
