#include "hydrochain/stats.hpp"

#include <algorithm>
#include <cmath>

#include "hydrochain/error.hpp"

namespace hydrochain::stats {

MeanSE mean_se(std::span<const double> values)
{
  MeanSE out;
  out.n = static_cast<int>(values.size());
  if (values.empty()) return out;
  double acc = 0.0;
  for (double v : values) acc += v;
  out.mean = acc / out.n;
  if (out.n < 2) return out;
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  out.spread = std::sqrt(ss / (out.n - 1));
  out.se = out.spread / std::sqrt(static_cast<double>(out.n));
  return out;
}

double separation(const MeanSE& a, const MeanSE& b) noexcept
{
  const double pooled = std::sqrt(a.se * a.se + b.se * b.se);
  const double diff = a.mean - b.mean;
  if (pooled == 0.0) return diff > 0.0 ? INFINITY : (diff < 0.0 ? -INFINITY : 0.0);
  return diff / pooled;
}

bool exceeds(const MeanSE& a, const MeanSE& b, double k) noexcept
{
  return separation(a, b) > k;
}

bool decreasing_trend(std::span<const MeanSE> seq, double k) noexcept
{
  for (std::size_t i = 1; i < seq.size(); ++i) {
    if (!exceeds(seq[i - 1], seq[i], k)) return false;
  }
  return true;
}

bool within(const MeanSE& m, double target, double k) noexcept
{
  return std::abs(m.mean - target) <= k * m.se;
}

double kolmogorov_survival(double lambda) noexcept
{
  if (lambda <= 0.0) return 1.0;
  if (lambda < 0.2) return 1.0;  // series converges slowly; Q is 1 to double precision here
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += sign * term;
    if (term < 1e-17) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_test(std::span<const double> samples, const std::function<double(double)>& cdf)
{
  if (samples.empty()) throw DomainError("ks_test: no samples");
  std::vector<double> x(samples.begin(), samples.end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  const double sn = std::sqrt(n);
  return {d, kolmogorov_survival((sn + 0.12 + 0.11 / sn) * d)};
}

double time_average(std::span<const double> t, std::span<const double> y)
{
  if (t.size() != y.size() || t.empty()) throw DomainError("time_average: size mismatch or empty");
  if (t.size() == 1) return y[0];
  double acc = 0.0;
  for (std::size_t k = 1; k < t.size(); ++k) acc += 0.5 * (t[k] - t[k - 1]) * (y[k] + y[k - 1]);
  const double span = t.back() - t.front();
  if (!(span > 0.0)) throw DomainError("time_average: zero time span");
  return acc / span;
}

}  // namespace hydrochain::stats
