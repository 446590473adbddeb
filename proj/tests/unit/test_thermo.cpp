#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"

#include "hydrochain/error.hpp"
#include "hydrochain/stats.hpp"
#include "hydrochain/thermo.hpp"
#include "hydrochain/thermo_table.hpp"

using namespace hydrochain;
using namespace hydrochain::thermo;

namespace {

// Composite Simpson on a wide uniform grid, independent of the adaptive
// quadrature in the library. The integrand is shifted by its value at the
// grid maximum so nothing overflows.
struct SimpsonMoments
{
  double log_z;
  double mean_r;
  double var_r;
  double mean_v;
};

SimpsonMoments simpson_moments(const PotentialParams& pot, double beta, double tau)
{
  const int n = 400000;
  const double lo = tau / (1.0 - pot.kappa) - 14.0 - std::abs(tau);
  const double hi = tau + 14.0 + std::abs(tau);
  const double h = (hi - lo) / n;
  std::vector<double> e(n + 1);
  double emax = -1e300;
  for (int k = 0; k <= n; ++k) {
    const double r = lo + k * h;
    e[k] = -beta * (potential_energy(pot, r) - tau * r);
    emax = std::max(emax, e[k]);
  }
  double z = 0, m1 = 0, m2 = 0, mv = 0;
  for (int k = 0; k <= n; ++k) {
    const double r = lo + k * h;
    const double w = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    const double f = w * std::exp(e[k] - emax);
    z += f;
    m1 += f * r;
    m2 += f * r * r;
    mv += f * potential_energy(pot, r);
  }
  const double mean = m1 / z;
  return {std::log(z * h / 3.0) + emax, mean, m2 / z - mean * mean, mv / z};
}

}  // namespace

TEST_SUITE("thermo")
{
  TEST_CASE("harmonic closed forms")
  {
    for (double beta : {0.5, 1.0, 3.0}) {
      const ThermoModel model(beta, PotentialParams{0.0, 0.1});
      for (double tau : {-3.0, -0.05, 0.0, 0.4, 2.5}) {
        const auto m = model.moments(tau);
        CHECK(m.log_partition ==
              doctest::Approx(0.5 * std::log(2 * std::numbers::pi / beta) + 0.5 * beta * tau * tau)
                  .epsilon(1e-11));
        CHECK(m.mean_strain == doctest::Approx(tau).epsilon(1e-11).scale(1.0));
        CHECK(m.strain_variance == doctest::Approx(1.0 / beta).epsilon(1e-10));
        CHECK(m.mean_force == doctest::Approx(tau).epsilon(1e-11).scale(1.0));
        CHECK(model.internal_energy(tau) == doctest::Approx(1.0 / beta + 0.5 * tau * tau).epsilon(1e-11));
        CHECK(model.tension_of_strain(tau) == doctest::Approx(tau).epsilon(1e-10).scale(1.0));
        CHECK(model.free_energy(tau) ==
              doctest::Approx(0.5 * tau * tau - std::log(2 * std::numbers::pi / beta) / (2 * beta))
                  .epsilon(1e-10));
      }
    }
  }

  TEST_CASE("anharmonic moments match an independent Simpson rule")
  {
    const PotentialParams pot{0.25, 0.1};
    for (double beta : {1.0, 4.0}) {
      const ThermoModel model(beta, pot);
      for (double tau : {-2.0, -0.08, 0.0, 0.03, 0.5, 3.0}) {
        const auto m = model.moments(tau);
        const auto s = simpson_moments(pot, beta, tau);
        CAPTURE(beta);
        CAPTURE(tau);
        CHECK(m.log_partition == doctest::Approx(s.log_z).epsilon(1e-10).scale(1.0));
        CHECK(m.mean_strain == doctest::Approx(s.mean_r).epsilon(1e-10).scale(1.0));
        CHECK(m.strain_variance == doctest::Approx(s.var_r).epsilon(1e-9));
        CHECK(m.mean_potential == doctest::Approx(s.mean_v).epsilon(1e-10).scale(1.0));
        CHECK(m.mean_force == doctest::Approx(tau).epsilon(1e-10).scale(1.0));
      }
    }
  }

  TEST_CASE("Legendre structure")
  {
    const ThermoModel model(1.0, PotentialParams{0.25, 0.1});
    const double e = 1e-4;
    for (double tau : {-1.0, -0.02, 0.0, 0.05, 1.5}) {
      const double rho = model.mean_strain(tau);
      // rho = G'(tau) / beta
      const double dg = (model.log_partition(tau + e) - model.log_partition(tau - e)) / (2 * e);
      CHECK(rho == doctest::Approx(dg).epsilon(1e-7).scale(1.0));
      // F'(rho) = tau
      const double df = (model.free_energy(rho + e) - model.free_energy(rho - e)) / (2 * e);
      CHECK(df == doctest::Approx(tau).epsilon(1e-7).scale(1.0));
      // tau'(rho) = 1 / (beta Var r)
      const auto m = model.moments(tau);
      CHECK(model.tension_slope(rho) == doctest::Approx(1.0 / (model.beta() * m.strain_variance)).epsilon(1e-6));
      CHECK(model.tension_of_strain(rho) == doctest::Approx(tau).epsilon(1e-12).scale(1.0));
      // S = beta (U - F)
      const double u = model.internal_energy(tau);
      CHECK(model.entropy(tau) == doctest::Approx(model.beta() * (u - model.free_energy(rho))).epsilon(1e-9));
    }
  }

  TEST_CASE("tension is monotone with slope between 1 - kappa and 1")
  {
    const ThermoModel model(2.0, PotentialParams{0.3, 0.1});
    double prev = -1e300;
    for (double rho = -3.0; rho <= 3.0; rho += 0.05) {
      const double tau = model.tension_of_strain(rho);
      CHECK(tau > prev);
      prev = tau;
      const double s = model.tension_slope(rho);
      CHECK(s >= 0.7 - 1e-6);
      CHECK(s <= 1.0 + 1e-6);
    }
  }

  TEST_CASE("table agrees with direct evaluation")
  {
    const ThermoModel model(1.0, PotentialParams{0.25, 0.1});
    const ThermoTable table(model);
    for (double rho = -4.0; rho <= 4.0; rho += 0.0371) {
      CAPTURE(rho);
      CHECK(table.tension(rho) == doctest::Approx(model.tension_of_strain(rho)).epsilon(1e-9).scale(1.0));
      CHECK(table.free_energy(rho) == doctest::Approx(model.free_energy(rho)).epsilon(1e-9).scale(1.0));
      CHECK(table.tension_slope(rho) == doctest::Approx(model.tension_slope(rho)).epsilon(1e-5));
    }
    for (double tau : {-2.0, 0.0, 0.7}) {
      CHECK(table.strain_of_tension(tau) == doctest::Approx(model.mean_strain(tau)).epsilon(1e-9).scale(1.0));
    }
    // outside the tabulated range the table defers to direct evaluation
    CHECK(table.tension(table.rho_max() + 1.0) == model.tension_of_strain(table.rho_max() + 1.0));
    CHECK_THROWS_AS(table.tension(std::nan("")), DomainError);
  }

  TEST_CASE("table rows")
  {
    const ThermoModel model(1.0, PotentialParams{0.25, 0.1});
    const auto rows = thermo_table_rows(model, -1.0, 1.0, 0.25);
    REQUIRE(rows.size() == 9);
    CHECK(rows.front().rho == -1.0);
    CHECK(rows.back().rho == doctest::Approx(1.0));
    for (const auto& row : rows) {
      CHECK(row.tau == doctest::Approx(model.tension_of_strain(row.rho)).epsilon(1e-12).scale(1.0));
      CHECK(row.tau_prime > 0.0);
    }
  }

  TEST_CASE("rejection sampler reproduces Gibbs moments")
  {
    const ThermoModel model(1.0, PotentialParams{0.25, 0.1});
    const double tau = 0.05;
    const std::size_t n = 200000;
    const auto samples = sample_canonical(model, 0.3, tau, n, 42);
    std::vector<double> r(n), p(n), f(n);
    for (std::size_t k = 0; k < n; ++k) {
      r[k] = samples[k].r;
      p[k] = samples[k].p;
      f[k] = potential_force(model.potential(), r[k]);
    }
    const auto m = model.moments(tau);
    const auto sr = stats::mean_se(r);
    const auto sp = stats::mean_se(p);
    const auto sf = stats::mean_se(f);
    CHECK(std::abs(sr.mean - m.mean_strain) < 4 * sr.se);
    CHECK(std::abs(sp.mean - 0.3) < 4 * sp.se);
    CHECK(std::abs(sf.mean - tau) < 4 * sf.se);
    CHECK(sr.spread * sr.spread == doctest::Approx(m.strain_variance).epsilon(0.02));

    // identical seeds, identical samples; different streams differ
    const auto again = sample_canonical(model, 0.3, tau, 100, 42);
    const auto other = sample_canonical(model, 0.3, tau, 100, 42, 1);
    for (std::size_t k = 0; k < 100; ++k) CHECK(again[k].r == samples[k].r);
    CHECK(other[0].r != samples[0].r);
  }

  TEST_CASE("harmonic sampler passes Kolmogorov-Smirnov")
  {
    const ThermoModel model(2.0, PotentialParams{0.0, 0.1});
    const auto samples = sample_canonical(model, 0.0, 0.4, 20000, 7);
    std::vector<double> r;
    for (const auto& s : samples) r.push_back(s.r);
    const double sd = std::sqrt(0.5);
    const auto result = stats::ks_test(r, [&](double x) { return 0.5 * std::erfc(-(x - 0.4) / (sd * std::sqrt(2.0))); });
    CHECK(result.p_value > 1e-3);
  }

  TEST_CASE("bad arguments")
  {
    CHECK_THROWS_AS(ThermoModel(0.0, PotentialParams{}), ConfigError);
    CHECK_THROWS_AS(ThermoModel(1.0, PotentialParams{0.5, 0.1}), ConfigError);
    const ThermoModel model(1.0, PotentialParams{});
    CHECK_THROWS_AS(model.moments(std::nan("")), DomainError);
    CHECK_THROWS_AS(sample_canonical(model, 0.0, 0.0, 0, 1), ConfigError);
  }
}
