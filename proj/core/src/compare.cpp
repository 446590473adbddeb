#include "hydrochain/compare.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "hydrochain/error.hpp"

namespace hydrochain {

namespace {

double left_edge(const blocks::Profile& p) { return p.x0 - 0.5 * p.dx; }
double right_edge(const blocks::Profile& p) { return p.x0 + (static_cast<double>(p.r.size()) - 0.5) * p.dx; }

std::size_t cell_of(const blocks::Profile& p, double x)
{
  const double s = (x - left_edge(p)) / p.dx;
  const auto j = static_cast<long>(std::floor(s));
  return static_cast<std::size_t>(std::clamp<long>(j, 0, static_cast<long>(p.r.size()) - 1));
}

}  // namespace

double ComparisonReport::mean_l1() const noexcept
{
  if (distances.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& d : distances) acc += d.l1_r + d.l1_p;
  return acc / static_cast<double>(distances.size());
}

double ComparisonReport::mean_l2() const noexcept
{
  if (distances.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& d : distances) acc += d.l2_r + d.l2_p;
  return acc / static_cast<double>(distances.size());
}

FieldDistance profile_distance(const blocks::Profile& a, const blocks::Profile& b, double window_lo,
                               double window_hi)
{
  if (!(window_lo < window_hi)) {
    throw ConfigError(fmt::format("comparison window [{}, {}] is empty", window_lo, window_hi));
  }
  constexpr double slack = 1e-12;
  for (const auto* p : {&a, &b}) {
    if (p->r.empty() || left_edge(*p) > window_lo + slack || right_edge(*p) < window_hi - slack) {
      throw ConfigError(fmt::format("profile covering [{}, {}] does not contain the window [{}, {}]",
                                    p->r.empty() ? 0.0 : left_edge(*p), p->r.empty() ? 0.0 : right_edge(*p),
                                    window_lo, window_hi));
    }
  }

  // Merge the cell edges of both profiles inside the window; on each piece
  // both profiles are constant.
  std::vector<double> cuts{window_lo, window_hi};
  for (const auto* p : {&a, &b}) {
    for (std::size_t j = 0; j <= p->r.size(); ++j) {
      const double e = left_edge(*p) + static_cast<double>(j) * p->dx;
      if (e > window_lo && e < window_hi) cuts.push_back(e);
    }
  }
  std::sort(cuts.begin(), cuts.end());

  FieldDistance d{a.t, 0.0, 0.0, 0.0, 0.0};
  for (std::size_t k = 1; k < cuts.size(); ++k) {
    const double w = cuts[k] - cuts[k - 1];
    if (w <= 0.0) continue;
    const double mid = 0.5 * (cuts[k] + cuts[k - 1]);
    const std::size_t ja = cell_of(a, mid);
    const std::size_t jb = cell_of(b, mid);
    const double dr = a.r[ja] - b.r[jb];
    const double dp = a.p[ja] - b.p[jb];
    d.l1_r += std::abs(dr) * w;
    d.l1_p += std::abs(dp) * w;
    d.l2_r += dr * dr * w;
    d.l2_p += dp * dp * w;
  }
  d.l2_r = std::sqrt(d.l2_r);
  d.l2_p = std::sqrt(d.l2_p);
  return d;
}

blocks::Profile profile_at(std::span<const blocks::Profile> series, double t)
{
  if (series.empty()) throw ConfigError("profile_at: empty series");
  constexpr double tol = 1e-9;
  if (t < series.front().t - tol || t > series.back().t + tol) {
    throw ConfigError(fmt::format("time {} outside the recorded range [{}, {}]", t, series.front().t,
                                  series.back().t));
  }
  for (const auto& p : series) {
    if (std::abs(p.t - t) <= tol) return p;
  }
  const auto hi = std::upper_bound(series.begin(), series.end(), t,
                                   [](double v, const blocks::Profile& p) { return v < p.t; });
  const auto& b = *hi;
  const auto& a = *(hi - 1);
  const double w = (t - a.t) / (b.t - a.t);
  blocks::Profile out{t, a.x0, a.dx, a.r, a.p};
  for (std::size_t j = 0; j < out.r.size(); ++j) {
    out.r[j] = (1.0 - w) * a.r[j] + w * b.r[j];
    out.p[j] = (1.0 - w) * a.p[j] + w * b.p[j];
  }
  return out;
}

ComparisonReport compare_micro_macro(std::span<const blocks::Profile> micro,
                                     std::span<const blocks::Profile> macro, double window_lo,
                                     double window_hi, int N)
{
  if (!(window_lo < window_hi)) {
    throw ConfigError(fmt::format("comparison window [{}, {}] is empty", window_lo, window_hi));
  }
  ComparisonReport report;
  report.N = N;
  report.window_lo = window_lo;
  report.window_hi = window_hi;
  for (const auto& m : micro) {
    report.distances.push_back(profile_distance(m, profile_at(macro, m.t), window_lo, window_hi));
  }
  return report;
}

}  // namespace hydrochain
