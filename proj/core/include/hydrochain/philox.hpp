#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace hydrochain::rng {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// Stateless: output is a pure function of (counter, key), which lets every
/// noise increment be addressed directly by (step, family, bond, level).
class Philox4x32
{
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr Counter apply(Counter ctr, Key key) noexcept
  {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      ctr = single_round(ctr, key);
    }
    return ctr;
  }

  static constexpr Key key_from_seed(std::uint64_t seed) noexcept
  {
    return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static constexpr Counter single_round(const Counter& c, const Key& k) noexcept
  {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
};

/// Open-interval uniform in (0,1) from 64 random bits. 52-bit resolution, so
/// the largest value stays strictly below 1 after rounding.
inline double to_unit_open(std::uint64_t bits) noexcept
{
  return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

/// Two independent uniforms in (0,1) from one Philox block.
inline std::array<double, 2> uniform_pair(const Philox4x32::Counter& ctr,
                                          const Philox4x32::Key& key) noexcept
{
  const auto out = Philox4x32::apply(ctr, key);
  const std::uint64_t a = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
  const std::uint64_t b = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
  return {to_unit_open(a), to_unit_open(b)};
}

/// Two independent standard normals (Box-Muller) from one Philox block.
inline std::array<double, 2> normal_pair(const Philox4x32::Counter& ctr,
                                         const Philox4x32::Key& key) noexcept
{
  const auto u = uniform_pair(ctr, key);
  const double radius = std::sqrt(-2.0 * std::log(u[0]));
  const double angle = 2.0 * std::numbers::pi * u[1];
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

/// splitmix64 finalizer; used to derive replica seeds from a base seed.
constexpr std::uint64_t mix_seed(std::uint64_t base, std::uint64_t index) noexcept
{
  std::uint64_t z = base + 0x9E3779B97F4A7C15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Sequential normal stream over a fixed (key, stream tag) pair, for code
/// paths that just need "the next normal" but must stay reproducible.
class NormalStream
{
 public:
  NormalStream(std::uint64_t seed, std::uint32_t tag) noexcept
      : key_(Philox4x32::key_from_seed(seed)), tag_(tag)
  {
  }

  double operator()() noexcept
  {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const auto z = normal_pair({static_cast<std::uint32_t>(index_),
                                static_cast<std::uint32_t>(index_ >> 32), tag_, 0x5EEDu},
                               key_);
    ++index_;
    spare_ = z[1];
    have_spare_ = true;
    return z[0];
  }

 private:
  Philox4x32::Key key_;
  std::uint32_t tag_;
  std::uint64_t index_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace hydrochain::rng
