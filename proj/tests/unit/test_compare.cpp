#include <cmath>
#include <vector>

#include "doctest.h"

#include "hydrochain/compare.hpp"
#include "hydrochain/error.hpp"

using namespace hydrochain;
using blocks::Profile;

TEST_SUITE("compare")
{
  TEST_CASE("a profile is at distance zero from itself")
  {
    const Profile a{0.0, 0.05, 0.1, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10}, {0, 1, 0, 1, 0, 1, 0, 1, 0, 1}};
    const auto d = profile_distance(a, a, 0.2, 0.8);
    CHECK(d.l1_r == 0.0);
    CHECK(d.l2_p == 0.0);
  }

  TEST_CASE("hand-computed distance across mismatched cells")
  {
    // a: cells of width 0.5 centred at 0.25 and 0.75, values 0 and 1.
    // b: constant 0.5 on cells of width 0.25.
    const Profile a{0.0, 0.25, 0.5, {0.0, 1.0}, {0.0, 0.0}};
    const Profile b{0.0, 0.125, 0.25, {0.5, 0.5, 0.5, 0.5}, {0.0, 0.0, 0.0, 0.0}};
    const auto d = profile_distance(a, b, 0.25, 0.75);
    // |a - b| = 0.5 on all of [0.25, 0.75]
    CHECK(d.l1_r == doctest::Approx(0.25));
    CHECK(d.l2_r == doctest::Approx(std::sqrt(0.125)));
    const auto e = profile_distance(a, b, 0.4, 0.6);
    CHECK(e.l1_r == doctest::Approx(0.1));
  }

  TEST_CASE("windows must be non-empty and covered")
  {
    const Profile a{0.0, 0.25, 0.5, {0.0, 1.0}, {0.0, 0.0}};
    const Profile narrow{0.0, 0.45, 0.1, {0.0, 1.0}, {0.0, 0.0}};
    CHECK_THROWS_AS(profile_distance(a, a, 0.6, 0.4), ConfigError);
    CHECK_THROWS_AS(profile_distance(a, narrow, 0.2, 0.8), ConfigError);
  }

  TEST_CASE("macro profile interpolation in time and reports")
  {
    std::vector<Profile> macro{{0.0, 0.25, 0.5, {0.0, 0.0}, {0.0, 0.0}}, {1.0, 0.25, 0.5, {2.0, 4.0}, {1.0, 1.0}}};
    const auto mid = profile_at(macro, 0.25);
    CHECK(mid.t == 0.25);
    CHECK(mid.r[0] == doctest::Approx(0.5));
    CHECK(mid.r[1] == doctest::Approx(1.0));
    CHECK(mid.p[0] == doctest::Approx(0.25));

    std::vector<Profile> micro{{0.25, 0.25, 0.5, {0.5, 1.0}, {0.25, 0.25}},
                               {1.0, 0.25, 0.5, {2.0, 3.0}, {1.0, 1.0}}};
    const auto rep = compare_micro_macro(micro, macro, 0.0, 1.0, 64);
    REQUIRE(rep.distances.size() == 2);
    CHECK(rep.N == 64);
    CHECK(rep.distances[0].l1_r == doctest::Approx(0.0).scale(1.0));
    CHECK(rep.distances[1].l1_r == doctest::Approx(0.5));
    CHECK(rep.mean_l1() == doctest::Approx(0.25));
  }
}
