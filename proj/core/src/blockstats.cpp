#include "hydrochain/blockstats.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "hydrochain/error.hpp"

namespace hydrochain::blocks {

namespace {

void check_hat_window(std::size_t n, int l, int i)
{
  const int N = static_cast<int>(n);
  if (l < 1 || i < l || i > N - l + 1) {
    throw RangeError(fmt::format("hat average: site {} outside [l, N-l+1] = [{}, {}]", i, l, N - l + 1));
  }
}

void check_bar_window(std::size_t n, int l, int i)
{
  const int N = static_cast<int>(n);
  if (l < 1 || i < l || i > N) {
    throw RangeError(fmt::format("bar average: site {} outside [l, N] = [{}, {}]", i, l, N));
  }
}

std::vector<double> field_values(const micro::ChainState& state, Field field,
                                 const thermo::PotentialParams& pot)
{
  switch (field) {
    case Field::Strain:
      return state.r;
    case Field::Momentum:
      return state.p;
    case Field::Force:
    case Field::Tension: {
      std::vector<double> f(state.r.size());
      for (std::size_t k = 0; k < f.size(); ++k) f[k] = thermo::potential_force(pot, state.r[k]);
      return f;
    }
  }
  return {};
}

// Hat field of the selector; Tension means tau(hat r), not a hat of tau(r).
std::vector<double> selected_hat(const micro::ChainState& state, int l, Field field,
                                 const thermo::ThermoTable& table)
{
  if (field == Field::Tension) {
    std::vector<double> h = hat_field(state.r, l);
    for (double& v : h) v = table.tension(v);
    return h;
  }
  return hat_field(field_values(state, field, table.model().potential()), l);
}

double field_eval(const std::vector<double>& values, int N, int l, double x) noexcept
{
  const auto i = static_cast<long>(std::floor(x * N + 0.5));
  if (i < l || i > N - l + 1) return 0.0;
  return values[static_cast<std::size_t>(i - l)];
}

}  // namespace

int default_block_size(int N, double exponent)
{
  return std::max(1, static_cast<int>(std::ceil(std::pow(static_cast<double>(N), exponent) - 1e-9)));
}

BlockSpec BlockSpec::with_default(int N, double exponent)
{
  return {default_block_size(N, exponent), N};
}

void BlockSpec::validate() const
{
  if (N < 1 || l < 1 || l > N) {
    throw ConfigError(fmt::format("block spec needs 1 <= l <= N (l = {}, N = {})", l, N));
  }
  if (N - l + 1 < l) {
    throw ConfigError(fmt::format("block half-width l = {} leaves no admissible site for N = {}", l, N));
  }
}

double hat_average(std::span<const double> u, int l, int i)
{
  check_hat_window(u.size(), l, i);
  double acc = 0.0;
  for (int j = -(l - 1); j <= l - 1; ++j) {
    acc += static_cast<double>(l - std::abs(j)) * u[static_cast<std::size_t>(i - j - 1)];
  }
  return acc / (static_cast<double>(l) * l);
}

double bar_average(std::span<const double> u, int l, int i)
{
  check_bar_window(u.size(), l, i);
  double acc = 0.0;
  for (int j = 0; j < l; ++j) acc += u[static_cast<std::size_t>(i - j - 1)];
  return acc / l;
}

double etahat_identity_gap(std::span<const double> u, int l, int i)
{
  const double lhs = hat_average(u, l, i + 1) - hat_average(u, l, i);
  const double rhs = (bar_average(u, l, i + l) - bar_average(u, l, i)) / l;
  return std::abs(lhs - rhs);
}

std::vector<double> bar_field(std::span<const double> u, int l)
{
  const int N = static_cast<int>(u.size());
  check_bar_window(u.size(), l, l);
  std::vector<double> out(static_cast<std::size_t>(N - l + 1));
  double window = 0.0;
  for (int s = 1; s <= l; ++s) window += u[s - 1];
  out[0] = window / l;
  for (int i = l + 1; i <= N; ++i) {
    window += u[i - 1] - u[i - l - 1];
    out[static_cast<std::size_t>(i - l)] = window / l;
  }
  return out;
}

std::vector<double> hat_field(std::span<const double> u, int l)
{
  // hat_{l,i} = (1/l) sum_{m=0}^{l-1} bar_{l,i+m}: a box filter applied twice.
  const int N = static_cast<int>(u.size());
  check_hat_window(u.size(), l, l);
  const std::vector<double> bar = bar_field(u, l);  // bar[k] = bar_{l, k+l}
  std::vector<double> out(static_cast<std::size_t>(N - 2 * l + 2));
  double window = 0.0;
  for (int m = 0; m < l; ++m) window += bar[m];
  out[0] = window / l;
  for (std::size_t k = 1; k < out.size(); ++k) {
    window += bar[k + l - 1] - bar[k - 1];
    out[k] = window / l;
  }
  return out;
}

const char* to_string(Field field) noexcept
{
  switch (field) {
    case Field::Strain: return "r";
    case Field::Momentum: return "p";
    case Field::Force: return "Vp";
    case Field::Tension: return "tau";
  }
  return "?";
}

double EmpiricalField::r_at(double x) const noexcept { return field_eval(r_hat, N, l, x); }
double EmpiricalField::p_at(double x) const noexcept { return field_eval(p_hat, N, l, x); }
double EmpiricalField::x_lo() const noexcept { return (l - 0.5) / N; }
double EmpiricalField::x_hi() const noexcept { return (N - l + 1.5) / N; }

EmpiricalField build_field(const micro::ChainState& state, const BlockSpec& spec)
{
  spec.validate();
  if (state.size() != spec.N) {
    throw ConfigError(fmt::format("block spec N = {} but state has {} sites", spec.N, state.size()));
  }
  return {spec.N, spec.l, state.t, hat_field(state.r, spec.l), hat_field(state.p, spec.l)};
}

double one_block_statistic(const micro::ChainState& state, const BlockSpec& spec,
                           const thermo::ThermoTable& table)
{
  spec.validate();
  const auto force_hat = hat_field(field_values(state, Field::Force, table.model().potential()), spec.l);
  const auto r_hat = hat_field(state.r, spec.l);
  double acc = 0.0;
  for (std::size_t k = 0; k < r_hat.size(); ++k) {
    const double d = force_hat[k] - table.tension(r_hat[k]);
    acc += d * d;
  }
  return acc / spec.N;
}

double two_block_statistic(const micro::ChainState& state, const BlockSpec& spec, Field field,
                           const thermo::ThermoTable& table)
{
  spec.validate();
  const auto h = selected_hat(state, spec.l, field, table);
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < h.size(); ++k) {
    const double d = h[k + 1] - h[k];
    acc += d * d;
  }
  return acc / spec.N;
}

double hat_bar_gap_statistic(const micro::ChainState& state, const BlockSpec& spec, Field field,
                             const thermo::PotentialParams& potential)
{
  spec.validate();
  if (field == Field::Tension) {
    throw ConfigError("hat/bar gap is defined for r, p and V' only");
  }
  const auto u = field_values(state, field, potential);
  const auto h = hat_field(u, spec.l);
  const auto b = bar_field(u, spec.l);  // b[k] = bar_{l, k+l}; h[k] = hat_{l, k+l}
  double acc = 0.0;
  for (std::size_t k = 0; k < h.size(); ++k) {
    const double d = h[k] - b[k];
    acc += d * d;
  }
  return acc / spec.N;
}

PairingResult empirical_pairing(const micro::ChainState& state, const BlockSpec& spec,
                                const std::function<double(double)>& J)
{
  const EmpiricalField field = build_field(state, spec);
  const int N = spec.N;
  PairingResult out{{0.0, 0.0}, {0.0, 0.0}};
  for (int i = 1; i <= N; ++i) {
    const double w = J(static_cast<double>(i) / N) / N;
    out.strain.raw += w * state.r[i - 1];
    out.momentum.raw += w * state.p[i - 1];
  }
  // Two-point Gauss-Legendre over each ball of the piecewise-constant field.
  const double half = 0.5 / N;
  const double g = half / std::sqrt(3.0);
  for (int i = spec.first_site(); i <= spec.last_site(); ++i) {
    const double c = static_cast<double>(i) / N;
    const double cell = half * (J(c - g) + J(c + g));
    out.strain.field += cell * field.r_hat[static_cast<std::size_t>(i - spec.l)];
    out.momentum.field += cell * field.p_hat[static_cast<std::size_t>(i - spec.l)];
  }
  return out;
}

Profile to_profile(const EmpiricalField& field)
{
  return {field.t, static_cast<double>(field.l) / field.N, 1.0 / field.N, field.r_hat, field.p_hat};
}

WeakResidual weak_residual(std::span<const Profile> series, const TestFunction& phi,
                           const TestFunction& psi, const thermo::ThermoTable& table)
{
  if (series.size() < 2) throw ConfigError("weak residual needs at least two recorded times");
  const double t_first = series.front().t;
  const double t_last = series.back().t;
  for (const TestFunction* f : {&phi, &psi}) {
    if (!(f->t_lo > std::max(0.0, t_first) && f->t_hi <= t_last && f->x_lo > 0.0 && f->x_hi < 1.0)) {
      throw ConfigError(fmt::format(
          "test function {} support [{}, {}] x [{}, {}] not inside (max(0, {}), {}] x (0, 1)", f->id,
          f->t_lo, f->t_hi, f->x_lo, f->x_hi, t_first, t_last));
    }
  }

  const auto slice = [&](const Profile& prof) {
    WeakResidual s{0.0, 0.0};
    const double t = prof.t;
    for (std::size_t j = 0; j < prof.r.size(); ++j) {
      const double x = prof.x0 + static_cast<double>(j) * prof.dx;
      const double r = prof.r[j];
      const double p = prof.p[j];
      s.mass += (r * phi.d_t(t, x) - p * phi.d_x(t, x)) * prof.dx;
      if (psi.d_x(t, x) != 0.0 || psi.d_t(t, x) != 0.0) {
        s.momentum += (p * psi.d_t(t, x) - table.tension(r) * psi.d_x(t, x)) * prof.dx;
      }
    }
    return s;
  };

  WeakResidual total{0.0, 0.0};
  WeakResidual prev = slice(series[0]);
  for (std::size_t k = 1; k < series.size(); ++k) {
    const WeakResidual cur = slice(series[k]);
    const double h = series[k].t - series[k - 1].t;
    total.mass += 0.5 * h * (prev.mass + cur.mass);
    total.momentum += 0.5 * h * (prev.momentum + cur.momentum);
    prev = cur;
  }
  return total;
}

}  // namespace hydrochain::blocks
