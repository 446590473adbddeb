#include "hydrochain/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "hydrochain/philox.hpp"

namespace hydrochain::ensemble {

std::uint64_t replica_seed(std::uint64_t base, int replica) noexcept
{
  return rng::mix_seed(base, static_cast<std::uint64_t>(replica));
}

void parallel_for(int count, int threads, const std::function<void(int)>& body)
{
  if (count <= 0) return;
  int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, count);
  if (workers == 1) {
    for (int k = 0; k < count; ++k) body(k);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int k = next.fetch_add(1); k < count; k = next.fetch_add(1)) body(k);
    });
  }
  for (auto& t : pool) t.join();
}

std::vector<Aggregate> aggregate(const std::vector<std::optional<Scalars>>& replicas)
{
  const Scalars* first = nullptr;
  int failed = 0;
  for (const auto& r : replicas) {
    if (!r) {
      ++failed;
    } else if (!first) {
      first = &*r;
    }
  }
  if (!first) throw NumericalError("ensemble: no surviving replicas to aggregate");
  if (failed > 0) {
    spdlog::warn("ensemble: aggregating {} of {} replicas ({} failed)", replicas.size() - failed,
                 replicas.size(), failed);
  }
  std::vector<Aggregate> out;
  out.reserve(first->size());
  for (std::size_t s = 0; s < first->size(); ++s) {
    std::vector<double> values;
    for (const auto& r : replicas) {
      if (!r) continue;
      if (r->size() != first->size() || (*r)[s].first != (*first)[s].first) {
        throw NumericalError(fmt::format("ensemble: statistic '{}' missing or reordered in a replica",
                                         (*first)[s].first));
      }
      values.push_back((*r)[s].second);
    }
    out.push_back({(*first)[s].first, stats::mean_se(values)});
  }
  return out;
}

const Aggregate& find(const std::vector<Aggregate>& aggregates, std::string_view name)
{
  for (const auto& a : aggregates) {
    if (a.name == name) return a;
  }
  throw NumericalError(fmt::format("ensemble: no statistic named '{}'", name));
}

}  // namespace hydrochain::ensemble
