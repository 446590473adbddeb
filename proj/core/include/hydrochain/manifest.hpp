#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace hydrochain {

/// 64-bit FNV-1a, used to fingerprint output files.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

struct OutputEntry
{
  std::string file;  ///< relative to the run directory
  std::size_t bytes = 0;
  std::size_t rows = 0;  ///< data rows for CSVs, 0 otherwise
  std::string fnv1a;     ///< 16 hex digits
};

/// Writes run outputs under one directory and keeps an index of them.
class OutputDir
{
 public:
  explicit OutputDir(std::filesystem::path root);

  const std::filesystem::path& root() const noexcept { return root_; }
  void write(const std::string& file, std::string_view content, std::size_t rows = 0);
  const std::vector<OutputEntry>& entries() const noexcept { return entries_; }

 private:
  std::filesystem::path root_;
  std::vector<OutputEntry> entries_;
};

struct CheckResult
{
  std::string name;
  bool passed = false;
  std::string detail;
};

struct RunManifest
{
  std::string experiment;
  std::string status;  ///< started | passed | failed | error
  std::string config_text;
  std::vector<std::uint64_t> seeds;
  std::string version;
  std::string fingerprint;
  std::vector<OutputEntry> outputs;
  std::vector<CheckResult> checks;
  std::vector<std::pair<std::string, long long>> step_counts;
  double wall_clock_seconds = 0.0;
  std::vector<std::string> warnings;
  std::string error;

  void write(const std::filesystem::path& path) const;
  static RunManifest read(const std::filesystem::path& path);
};

std::string version_string();
/// Version, compiler and language level; enough to tell builds apart.
std::string build_fingerprint();

}  // namespace hydrochain
