#include "hydrochain/manifest.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include "json.hpp"

#include "hydrochain/error.hpp"

#ifndef HYDROCHAIN_VERSION
#define HYDROCHAIN_VERSION "0.0.0"
#endif

namespace hydrochain {

using nlohmann::json;

std::uint64_t fnv1a64(std::string_view bytes) noexcept
{
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

OutputDir::OutputDir(std::filesystem::path root) : root_(std::move(root))
{
  std::filesystem::create_directories(root_);
}

void OutputDir::write(const std::string& file, std::string_view content, std::size_t rows)
{
  const auto path = root_ / file;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(fmt::format("short write to '{}'", path.string()));
  entries_.push_back({file, content.size(), rows, fmt::format("{:016x}", fnv1a64(content))});
}

void RunManifest::write(const std::filesystem::path& path) const
{
  json j;
  j["experiment"] = experiment;
  j["status"] = status;
  j["config"] = config_text;
  j["seeds"] = seeds;
  j["version"] = version;
  j["fingerprint"] = fingerprint;
  j["outputs"] = json::array();
  for (const auto& o : outputs) {
    j["outputs"].push_back({{"file", o.file}, {"bytes", o.bytes}, {"rows", o.rows}, {"fnv1a", o.fnv1a}});
  }
  j["checks"] = json::array();
  for (const auto& c : checks) {
    j["checks"].push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  }
  j["steps"] = json::object();
  for (const auto& [k, v] : step_counts) j["steps"][k] = v;
  j["wall_clock_seconds"] = wall_clock_seconds;
  j["warnings"] = warnings;
  if (!error.empty()) j["error"] = error;

  // Write-then-rename so a crash never leaves a half-written manifest.
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw Error(fmt::format("cannot write manifest '{}'", tmp.string()));
    out << j.dump(2) << '\n';
  }
  std::filesystem::rename(tmp, path);
}

RunManifest RunManifest::read(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open manifest '{}'", path.string()));
  json j;
  try {
    in >> j;
    RunManifest m;
    m.experiment = j.at("experiment").get<std::string>();
    m.status = j.at("status").get<std::string>();
    m.config_text = j.at("config").get<std::string>();
    m.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    m.version = j.value("version", "");
    m.fingerprint = j.value("fingerprint", "");
    const json outputs = j.value("outputs", json::array());
    const json checks = j.value("checks", json::array());
    const json steps = j.value("steps", json::object());
    for (const auto& o : outputs) {
      m.outputs.push_back({o.at("file").get<std::string>(), o.at("bytes").get<std::size_t>(),
                           o.at("rows").get<std::size_t>(), o.at("fnv1a").get<std::string>()});
    }
    for (const auto& c : checks) {
      m.checks.push_back({c.at("name").get<std::string>(), c.at("passed").get<bool>(),
                          c.value("detail", "")});
    }
    for (const auto& [k, v] : steps.items()) {
      m.step_counts.emplace_back(k, v.get<long long>());
    }
    m.wall_clock_seconds = j.value("wall_clock_seconds", 0.0);
    m.warnings = j.value("warnings", std::vector<std::string>{});
    m.error = j.value("error", "");
    return m;
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("malformed manifest '{}': {}", path.string(), e.what()));
  }
}

std::string version_string() { return HYDROCHAIN_VERSION; }

std::string build_fingerprint()
{
#if defined(__clang__)
  const std::string compiler = fmt::format("clang {}.{}.{}", __clang_major__, __clang_minor__, __clang_patchlevel__);
#elif defined(__GNUC__)
  const std::string compiler = fmt::format("gcc {}.{}.{}", __GNUC__, __GNUC_MINOR__, __GNUC_PATCHLEVEL__);
#else
  const std::string compiler = "unknown compiler";
#endif
  return fmt::format("hydrochain {} / {} / C++{}", HYDROCHAIN_VERSION, compiler, __cplusplus);
}

}  // namespace hydrochain
