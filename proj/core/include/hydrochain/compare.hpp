#pragma once

#include <span>
#include <vector>

#include "hydrochain/blockstats.hpp"

namespace hydrochain {

/// Distances between two piecewise-constant profiles on [window_lo, window_hi].
struct FieldDistance
{
  double t;
  double l1_r;
  double l1_p;
  double l2_r;
  double l2_p;
};

struct ComparisonReport
{
  int N = 0;
  double window_lo = 0.0;
  double window_hi = 0.0;
  std::vector<FieldDistance> distances;  ///< one per comparison time

  /// Time average of l1_r + l1_p over the comparison times.
  double mean_l1() const noexcept;
  double mean_l2() const noexcept;
};

/// Distance of two profiles on a window, exact for piecewise-constant cells.
/// Throws ConfigError if the window is empty or not covered by both profiles.
FieldDistance profile_distance(const blocks::Profile& a, const blocks::Profile& b, double window_lo,
                               double window_hi);

/// Macro profile at time t, linearly interpolated between the bracketing
/// records (all records share one grid).
blocks::Profile profile_at(std::span<const blocks::Profile> series, double t);

/// Compares each micro profile against the macro series at the same time.
ComparisonReport compare_micro_macro(std::span<const blocks::Profile> micro,
                                     std::span<const blocks::Profile> macro, double window_lo,
                                     double window_hi, int N = 0);

}  // namespace hydrochain
