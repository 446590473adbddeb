#pragma once

#include <cstdint>
#include <exception>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hydrochain/error.hpp"
#include "hydrochain/stats.hpp"

namespace hydrochain::ensemble {

/// Seed of replica k: a splitmix64 hash of (base, k), so replicas are
/// independent streams and any one can be rerun alone.
std::uint64_t replica_seed(std::uint64_t base, int replica) noexcept;

/// Runs body(k) for k in [0, count) on up to `threads` workers (0: hardware
/// concurrency). Indices are handed out in order; body must not share state.
void parallel_for(int count, int threads, const std::function<void(int)>& body);

struct ReplicaFailure
{
  int replica;
  std::string message;
  bool blow_up;
};

template <class T>
struct Result
{
  std::vector<std::optional<T>> replicas;
  std::vector<ReplicaFailure> failures;

  int survivors() const noexcept
  {
    int n = 0;
    for (const auto& r : replicas) n += r.has_value();
    return n;
  }
  bool all_blew_up() const noexcept
  {
    if (failures.empty() || survivors() > 0) return false;
    for (const auto& f : failures) {
      if (!f.blow_up) return false;
    }
    return true;
  }
};

/// Runs `count` replicas; exceptions are recorded per replica and the
/// remaining replicas continue.
template <class T>
Result<T> run(int count, int threads, const std::function<T(int)>& body)
{
  Result<T> out;
  out.replicas.resize(static_cast<std::size_t>(count));
  std::vector<std::optional<ReplicaFailure>> errors(static_cast<std::size_t>(count));
  parallel_for(count, threads, [&](int k) {
    try {
      out.replicas[k].emplace(body(k));
    } catch (const BlowUpError& e) {
      errors[k] = ReplicaFailure{k, e.what(), true};
    } catch (const std::exception& e) {
      errors[k] = ReplicaFailure{k, e.what(), false};
    }
  });
  for (auto& e : errors) {
    if (e) out.failures.push_back(std::move(*e));
  }
  return out;
}

/// Named scalar statistics of one replica.
using Scalars = std::vector<std::pair<std::string, double>>;

struct Aggregate
{
  std::string name;
  stats::MeanSE value;
};

/// Mean and standard error of every statistic over the surviving replicas,
/// in the order of the first survivor. Logs a warning when replicas failed.
/// Throws NumericalError when there are no survivors or the names disagree.
std::vector<Aggregate> aggregate(const std::vector<std::optional<Scalars>>& replicas);

const Aggregate& find(const std::vector<Aggregate>& aggregates, std::string_view name);

}  // namespace hydrochain::ensemble
