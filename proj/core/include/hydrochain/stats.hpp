#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace hydrochain::stats {

/// Sample mean and standard error of the mean (n - 1 normalization).
struct MeanSE
{
  double mean = 0.0;
  double se = 0.0;
  double spread = 0.0;  ///< sample standard deviation
  int n = 0;
};

MeanSE mean_se(std::span<const double> values);

/// a.mean - b.mean in units of the pooled error sqrt(a.se^2 + b.se^2).
double separation(const MeanSE& a, const MeanSE& b) noexcept;

/// True when a.mean exceeds b.mean by more than `k` pooled standard errors.
bool exceeds(const MeanSE& a, const MeanSE& b, double k = 2.0) noexcept;

/// Strictly decreasing sequence, each consecutive pair separated by > k pooled errors.
bool decreasing_trend(std::span<const MeanSE> seq, double k = 2.0) noexcept;

/// |mean - target| <= k se.
bool within(const MeanSE& m, double target, double k) noexcept;

/// Kolmogorov survival function Q(lambda) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 lambda^2).
double kolmogorov_survival(double lambda) noexcept;

struct KsResult
{
  double statistic;  ///< D_n = sup |F_n - F|
  double p_value;    ///< asymptotic, with the Stephens small-sample correction
};

/// One-sample Kolmogorov-Smirnov test; `samples` is copied and sorted.
KsResult ks_test(std::span<const double> samples, const std::function<double(double)>& cdf);

/// Time average with the trapezoid rule over (t, y).
double time_average(std::span<const double> t, std::span<const double> y);

}  // namespace hydrochain::stats
