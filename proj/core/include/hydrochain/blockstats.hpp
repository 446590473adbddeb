#pragma once

#include <functional>
#include <span>
#include <vector>

#include "hydrochain/chain.hpp"
#include "hydrochain/test_functions.hpp"
#include "hydrochain/thermo_table.hpp"

namespace hydrochain::blocks {

// Sites are numbered 1..N as in the chain; span index k holds site k+1.

/// l(N) = ceil(N^exponent); with sigma = ceil(N^{3/4}) and exponent 2/3,
/// l/sigma = N^{-1/12} and N sigma / l^3 = N^{-1/4}.
int default_block_size(int N, double exponent = 2.0 / 3.0);

struct BlockSpec
{
  int l = 1;
  int N = 1;

  static BlockSpec with_default(int N, double exponent = 2.0 / 3.0);

  /// Throws ConfigError unless 1 <= l <= N and the hat window is non-empty.
  void validate() const;
  int first_site() const noexcept { return l; }
  int last_site() const noexcept { return N - l + 1; }
};

/// Triangular average (1/l) sum_{|j|<l} (l-|j|)/l u_{i-j}; requires l <= i <= N-l+1.
double hat_average(std::span<const double> u, int l, int i);

/// Flat left window (1/l) sum_{j=0}^{l-1} u_{i-j}; requires l <= i <= N.
double bar_average(std::span<const double> u, int l, int i);

/// |(hat_{l,i+1} - hat_{l,i}) - (bar_{l,i+l} - bar_{l,i}) / l|, an exact
/// identity between the two kernels; requires l <= i and i + l <= N.
double etahat_identity_gap(std::span<const double> u, int l, int i);

/// hat_{l,i} for every i in [l, N-l+1] (O(N) via nested prefix sums).
std::vector<double> hat_field(std::span<const double> u, int l);

/// bar_{l,i} for every i in [l, N].
std::vector<double> bar_field(std::span<const double> u, int l);

enum class Field { Strain, Momentum, Force, Tension };

const char* to_string(Field field) noexcept;

/// Piecewise-constant empirical process built from triangular block averages:
/// value hat_{l,i} on the ball of centre i/N and diameter 1/N, zero elsewhere.
struct EmpiricalField
{
  int N = 0;
  int l = 0;
  double t = 0.0;
  std::vector<double> r_hat;  ///< sites l..N-l+1
  std::vector<double> p_hat;

  double r_at(double x) const noexcept;
  double p_at(double x) const noexcept;
  double x_lo() const noexcept;  ///< left edge of the covered range
  double x_hi() const noexcept;
};

EmpiricalField build_field(const micro::ChainState& state, const BlockSpec& spec);

/// (1/N) sum_{i=l}^{N-l+1} (hatV'_{l,i} - tau(hat r_{l,i}))^2.
double one_block_statistic(const micro::ChainState& state, const BlockSpec& spec,
                           const thermo::ThermoTable& table);

/// (1/N) sum_{i=l}^{N-l} (hat zeta_{l,i+1} - hat zeta_{l,i})^2.
double two_block_statistic(const micro::ChainState& state, const BlockSpec& spec, Field field,
                           const thermo::ThermoTable& table);

/// (1/N) sum_{i=l}^{N-l+1} (hat eta_{l,i} - bar eta_{l,i})^2 for eta in {r, p, V'}.
double hat_bar_gap_statistic(const micro::ChainState& state, const BlockSpec& spec, Field field,
                             const thermo::PotentialParams& potential);

struct Pairing
{
  double raw;    ///< (1/N) sum J(i/N) u_i
  double field;  ///< integral of J times the empirical field
  double gap() const noexcept { return raw - field; }
};

struct PairingResult
{
  Pairing strain;
  Pairing momentum;
};

PairingResult empirical_pairing(const micro::ChainState& state, const BlockSpec& spec,
                                const std::function<double(double)>& J);

/// Piecewise-constant profile snapshot on a uniform grid: cell j has centre
/// x0 + j dx and width dx. Both empirical fields and PDE states map onto it.
struct Profile
{
  double t = 0.0;
  double x0 = 0.0;
  double dx = 0.0;
  std::vector<double> r;
  std::vector<double> p;
};

Profile to_profile(const EmpiricalField& field);

struct WeakResidual
{
  double mass;      ///< int int (r phi_t - p phi_x)
  double momentum;  ///< int int (p psi_t - tau(r) psi_x)
};

/// Space-time quadratures of the weak formulation over a recorded profile
/// series: cell midpoints in x, trapezoid over the record times.
/// Throws ConfigError if a test function's support is not strictly inside
/// (t_first, t_last] x (0, 1).
WeakResidual weak_residual(std::span<const Profile> series, const TestFunction& phi,
                           const TestFunction& psi, const thermo::ThermoTable& table);

}  // namespace hydrochain::blocks
