#include <cmath>
#include <vector>

#include "doctest.h"

#include "hydrochain/blockstats.hpp"
#include "hydrochain/error.hpp"
#include "hydrochain/philox.hpp"

using namespace hydrochain;
using namespace hydrochain::blocks;

namespace {

std::vector<double> linear(int N, double a, double b = 0.0)
{
  std::vector<double> u(N);
  for (int i = 1; i <= N; ++i) u[i - 1] = a * i + b;
  return u;
}

const thermo::ThermoTable& harmonic_table()
{
  static const thermo::ThermoModel model(1.0, {0.0, 0.1});
  static const thermo::ThermoTable table(model);
  return table;
}

}  // namespace

TEST_SUITE("blockstats")
{
  TEST_CASE("hand-computed averages")
  {
    const std::vector<double> u{1, 4, 2, 8, 5, 7};
    // l = 2, i = 3: weights 1, 2, 1 on u_2, u_3, u_4
    CHECK(hat_average(u, 2, 3) == doctest::Approx((4 + 2 * 2 + 8) / 4.0));
    // l = 3, i = 3: weights 1, 2, 3, 2, 1 on u_1 .. u_5
    CHECK(hat_average(u, 3, 3) == doctest::Approx((1 + 2 * 4 + 3 * 2 + 2 * 8 + 5) / 9.0));
    CHECK(bar_average(u, 3, 5) == doctest::Approx((2 + 8 + 5) / 3.0));
    CHECK(bar_average(u, 1, 6) == 7.0);
    CHECK(hat_average(u, 1, 4) == 8.0);
  }

  TEST_CASE("linear data: hat is exact and bar lags by (l-1)/2")
  {
    const auto u = linear(40, 0.5, 1.0);
    for (int l : {1, 2, 5, 10}) {
      for (int i = l; i <= 40 - l + 1; ++i) {
        CHECK(hat_average(u, l, i) == doctest::Approx(0.5 * i + 1.0));
        CHECK(bar_average(u, l, i) == doctest::Approx(0.5 * (i - 0.5 * (l - 1)) + 1.0));
      }
    }
  }

  TEST_CASE("fields agree with pointwise averages and the telescoping identity")
  {
    std::vector<double> u(97);
    rng::NormalStream z(3, 0);
    for (auto& x : u) x = z();
    for (int l : {1, 4, 13}) {
      const auto h = hat_field(u, l);
      const auto b = bar_field(u, l);
      REQUIRE(h.size() == static_cast<std::size_t>(97 - 2 * l + 2));
      REQUIRE(b.size() == static_cast<std::size_t>(97 - l + 1));
      for (int i = l; i <= 97 - l + 1; ++i) CHECK(h[i - l] == doctest::Approx(hat_average(u, l, i)).epsilon(1e-12));
      for (int i = l; i <= 97; ++i) CHECK(b[i - l] == doctest::Approx(bar_average(u, l, i)).epsilon(1e-12));
      for (int i = l; i + 1 <= 97 - l + 1; ++i) CHECK(etahat_identity_gap(u, l, i) < 1e-14);
    }
  }

  TEST_CASE("windows outside the admissible range raise RangeError")
  {
    const std::vector<double> u(10, 1.0);
    CHECK_THROWS_AS(hat_average(u, 3, 2), RangeError);
    CHECK_THROWS_AS(hat_average(u, 3, 9), RangeError);
    CHECK_NOTHROW(hat_average(u, 3, 8));
    CHECK_THROWS_AS(bar_average(u, 3, 11), RangeError);
    CHECK_THROWS_AS(hat_field(u, 6), RangeError);
    CHECK_THROWS_AS((BlockSpec{6, 10}.validate()), ConfigError);
  }

  TEST_CASE("default block size")
  {
    CHECK(default_block_size(128) == 26);
    CHECK(default_block_size(512) == 64);
    CHECK(BlockSpec::with_default(1000).l == 100);
  }

  TEST_CASE("statistics on a linear ramp")
  {
    const int N = 60, l = 5;
    const double a = 0.01;
    micro::ChainState s{linear(N, a), std::vector<double>(N, 0.25), 0.0};
    const BlockSpec spec{l, N};
    const auto& table = harmonic_table();
    CHECK(two_block_statistic(s, spec, Field::Strain, table) == doctest::Approx(a * a * (N - 2 * l + 1) / N));
    CHECK(two_block_statistic(s, spec, Field::Momentum, table) == doctest::Approx(0.0));
    CHECK(hat_bar_gap_statistic(s, spec, Field::Strain, table.model().potential()) ==
          doctest::Approx(std::pow(a * (l - 1) / 2.0, 2) * (N - 2 * l + 2) / N));
    CHECK_THROWS_AS(hat_bar_gap_statistic(s, spec, Field::Tension, table.model().potential()), ConfigError);
    // harmonic: V' = tau, so the one-block statistic only sees table error
    CHECK(one_block_statistic(s, spec, table) < 1e-18);
    CHECK(two_block_statistic(s, spec, Field::Tension, table) == doctest::Approx(a * a * (N - 2 * l + 1) / N).epsilon(1e-6));
  }

  TEST_CASE("empirical field and pairing")
  {
    const int N = 50, l = 4;
    micro::ChainState s{std::vector<double>(N, 0.3), std::vector<double>(N, -0.2), 0.5};
    const BlockSpec spec{l, N};
    const auto f = build_field(s, spec);
    CHECK(f.r_at(0.5) == doctest::Approx(0.3));
    CHECK(f.p_at(0.5) == doctest::Approx(-0.2));
    CHECK(f.r_at(0.01) == 0.0);
    CHECK(f.x_lo() == doctest::Approx(3.5 / N));
    CHECK(f.x_hi() == doctest::Approx(47.5 / N));
    const auto pr = empirical_pairing(s, spec, [](double) { return 1.0; });
    CHECK(pr.strain.raw == doctest::Approx(0.3));
    CHECK(pr.strain.field == doctest::Approx(0.3 * (N - 2 * l + 2) / N));
    CHECK(pr.momentum.field == doctest::Approx(-0.2 * (N - 2 * l + 2) / N));

    const auto prof = to_profile(f);
    CHECK(prof.t == 0.5);
    CHECK(prof.r.size() == f.r_hat.size());
    CHECK(prof.x0 == doctest::Approx(double(l) / N));

    micro::ChainState wrong{std::vector<double>(N + 1, 0.0), std::vector<double>(N + 1, 0.0), 0.0};
    CHECK_THROWS_AS(build_field(wrong, spec), ConfigError);
  }

  TEST_CASE("weak residual vanishes for a steady uniform state")
  {
    const auto& table = harmonic_table();
    std::vector<Profile> series;
    for (int k = 0; k <= 100; ++k) {
      series.push_back({0.01 * k, 0.0, 0.005, std::vector<double>(200, 0.4), std::vector<double>(200, 0.0)});
    }
    const auto phi = bump_product(0.2, 0.8, 0.3, 0.7);
    const auto w = weak_residual(series, phi, phi, table);
    CHECK(std::abs(w.mass) < 1e-6);
    CHECK(std::abs(w.momentum) < 1e-6);
    const auto outside = bump_product(0.0, 0.8, 0.3, 0.7);
    CHECK_THROWS_AS(weak_residual(series, outside, phi, table), ConfigError);
  }
}
