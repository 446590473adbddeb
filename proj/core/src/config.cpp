#include "hydrochain/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "hydrochain/blockstats.hpp"
#include "hydrochain/error.hpp"

namespace hydrochain {

namespace {

std::string_view trim(std::string_view s)
{
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_list(std::string_view s)
{
  std::vector<std::string_view> out;
  while (true) {
    const auto c = s.find(',');
    out.push_back(trim(s.substr(0, c)));
    if (c == std::string_view::npos) break;
    s.remove_prefix(c + 1);
  }
  return out;
}

template <class T>
T parse_number(std::string_view s, std::string_view key)
{
  T value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw ConfigError(fmt::format("{}: cannot parse '{}' as a number", key, s));
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(value)) throw ConfigError(fmt::format("{}: value must be finite", key));
  }
  return value;
}

bool parse_bool(std::string_view s, std::string_view key)
{
  if (s == "true" || s == "yes" || s == "1" || s == "on") return true;
  if (s == "false" || s == "no" || s == "0" || s == "off") return false;
  throw ConfigError(fmt::format("{}: expected true/false, got '{}'", key, s));
}

template <class T>
std::vector<T> parse_list(std::string_view s, std::string_view key)
{
  std::vector<T> out;
  for (auto item : split_list(s)) out.push_back(parse_number<T>(item, key));
  return out;
}

// shortest representation that parses back to the same double
std::string fmt_double(double v) { return fmt::format("{}", v); }

template <class T>
std::string fmt_list(const std::vector<T>& v)
{
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    if constexpr (std::is_floating_point_v<T>) {
      out += fmt_double(v[i]);
    } else {
      out += fmt::format("{}", v[i]);
    }
  }
  return out;
}

struct Key
{
  std::string_view name;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define HC_DOUBLE(field)                                                                          \
  Key{#field, [](RunConfig& c, std::string_view v) { c.field = parse_number<double>(v, #field); }, \
      [](const RunConfig& c) { return fmt_double(c.field); }}
#define HC_INT(field)                                                                          \
  Key{#field, [](RunConfig& c, std::string_view v) { c.field = parse_number<int>(v, #field); }, \
      [](const RunConfig& c) { return fmt::format("{}", c.field); }}

const std::vector<Key>& keys()
{
  static const std::vector<Key> table = {
      Key{"experiment", [](RunConfig& c, std::string_view v) { c.experiment = std::string(v); },
          [](const RunConfig& c) { return c.experiment; }},
      HC_DOUBLE(beta),
      HC_DOUBLE(kappa),
      HC_DOUBLE(moll_width),
      HC_DOUBLE(table_tau_min),
      HC_DOUBLE(table_tau_max),
      HC_DOUBLE(table_step),
      HC_DOUBLE(rho_min),
      HC_DOUBLE(rho_max),
      HC_DOUBLE(rho_step),
      HC_INT(N),
      Key{"Ns", [](RunConfig& c, std::string_view v) { c.Ns = parse_list<int>(v, "Ns"); },
          [](const RunConfig& c) { return fmt_list(c.Ns); }},
      HC_DOUBLE(sigma),
      HC_DOUBLE(sigma_exponent),
      HC_DOUBLE(theta),
      HC_DOUBLE(dt),
      HC_DOUBLE(t_end),
      HC_INT(refinement),
      Key{"schedule",
          [](RunConfig& c, std::string_view v) { c.schedule.kind = schedule_kind_from_string(v); },
          [](const RunConfig& c) { return std::string(to_string(c.schedule.kind)); }},
      Key{"tau0", [](RunConfig& c, std::string_view v) { c.schedule.tau0 = parse_number<double>(v, "tau0"); },
          [](const RunConfig& c) { return fmt_double(c.schedule.tau0); }},
      Key{"tau1", [](RunConfig& c, std::string_view v) { c.schedule.tau1 = parse_number<double>(v, "tau1"); },
          [](const RunConfig& c) { return fmt_double(c.schedule.tau1); }},
      Key{"ramp_time",
          [](RunConfig& c, std::string_view v) { c.schedule.ramp_time = parse_number<double>(v, "ramp_time"); },
          [](const RunConfig& c) { return fmt_double(c.schedule.ramp_time); }},
      Key{"step_time",
          [](RunConfig& c, std::string_view v) { c.schedule.step_time = parse_number<double>(v, "step_time"); },
          [](const RunConfig& c) { return fmt_double(c.schedule.step_time); }},
      Key{"seed", [](RunConfig& c, std::string_view v) { c.seed = parse_number<std::uint64_t>(v, "seed"); },
          [](const RunConfig& c) { return fmt::format("{}", c.seed); }},
      HC_INT(replicas),
      HC_INT(record_count),
      Key{"write_snapshots",
          [](RunConfig& c, std::string_view v) { c.write_snapshots = parse_bool(v, "write_snapshots"); },
          [](const RunConfig& c) { return std::string(c.write_snapshots ? "true" : "false"); }},
      HC_INT(l),
      HC_DOUBLE(l_exponent),
      Key{"ls", [](RunConfig& c, std::string_view v) { c.ls = parse_list<int>(v, "ls"); },
          [](const RunConfig& c) { return fmt_list(c.ls); }},
      HC_INT(M),
      HC_DOUBLE(cfl),
      HC_DOUBLE(delta1),
      HC_DOUBLE(delta2),
      Key{"ramp_times",
          [](RunConfig& c, std::string_view v) { c.ramp_times = parse_list<double>(v, "ramp_times"); },
          [](const RunConfig& c) { return fmt_list(c.ramp_times); }},
      HC_DOUBLE(settle_time),
      HC_DOUBLE(window_lo),
      HC_DOUBLE(window_hi),
      HC_INT(threads),
  };
  return table;
}

#undef HC_DOUBLE
#undef HC_INT

TensionSchedule::Kind preset_schedule(std::string_view experiment)
{
  if (experiment == "ramp" || experiment == "quasistatic_sweep" || experiment == "convergence_study") {
    return TensionSchedule::Kind::Ramp;
  }
  if (experiment == "shock") return TensionSchedule::Kind::Step;
  return TensionSchedule::Kind::Constant;
}

}  // namespace

const std::vector<std::string>& experiment_names()
{
  static const std::vector<std::string> names = {"equilibrium",       "ramp",    "quasistatic_sweep",
                                                 "shock",             "convergence_study", "block_scaling"};
  return names;
}

double RunConfig::sigma_for(int n) const
{
  return sigma > 0.0 ? sigma : micro::default_sigma(n, sigma_exponent);
}

double RunConfig::dt_for(int n) const
{
  return dt > 0.0 ? dt : theta / (n * sigma_for(n));
}

int RunConfig::block_size_for(int n) const
{
  return l > 0 ? l : blocks::default_block_size(n, l_exponent);
}

std::vector<double> RunConfig::record_times(double horizon) const
{
  std::vector<double> out(static_cast<std::size_t>(record_count));
  for (int k = 0; k < record_count; ++k) out[k] = horizon * k / (record_count - 1);
  out.back() = horizon;
  return out;
}

micro::ChainConfig RunConfig::chain_config(int n, std::uint64_t replica_seed) const
{
  micro::ChainConfig c;
  c.N = n;
  c.sigma = sigma_for(n);
  c.dt = dt_for(n);
  c.t_end = t_end;
  c.schedule = schedule;
  c.seed = replica_seed;
  c.record_times = record_times(t_end);
  c.refinement = refinement;
  c.validate();
  return c;
}

macro::MacroConfig RunConfig::macro_config(double horizon) const
{
  macro::MacroConfig c;
  c.M = M;
  c.delta1 = delta1;
  c.delta2 = delta2;
  c.schedule = schedule;
  c.cfl = cfl;
  c.t_end = horizon;
  c.record_times = record_times(horizon);
  c.validate();
  return c;
}

void RunConfig::validate() const
{
  if (!experiment.empty() &&
      std::find(experiment_names().begin(), experiment_names().end(), experiment) == experiment_names().end()) {
    throw ConfigError(fmt::format("unknown experiment '{}' (expected one of {})", experiment,
                                  fmt::join(experiment_names(), ", ")));
  }
  if (!(beta > 0.0)) throw ConfigError(fmt::format("beta = {} must be positive", beta));
  potential().validate();
  if (!(table_tau_min < table_tau_max) || !(table_step > 0.0)) {
    throw ConfigError("table range needs table_tau_min < table_tau_max and table_step > 0");
  }
  if (!(rho_min < rho_max) || !(rho_step > 0.0)) {
    throw ConfigError("thermo-table export needs rho_min < rho_max and rho_step > 0");
  }
  if (!(theta > 0.0 && theta <= micro::kMaxTheta)) {
    throw ConfigError(fmt::format("theta = {} must lie in (0, {}] for explicit stability", theta, micro::kMaxTheta));
  }
  if (sigma < 0.0) throw ConfigError(fmt::format("sigma = {} must be >= 0 (0 selects the default)", sigma));
  if (!(sigma_exponent > 0.5 && sigma_exponent < 1.0)) {
    throw ConfigError(fmt::format("sigma_exponent = {} must lie in (1/2, 1) so that sigma/N -> 0 and N/sigma^2 -> 0",
                                  sigma_exponent));
  }
  if (dt < 0.0) throw ConfigError(fmt::format("dt = {} must be >= 0 (0 selects theta/(N sigma))", dt));
  if (!(t_end > 0.0)) throw ConfigError(fmt::format("t_end = {} must be positive", t_end));
  if (refinement < 0 || refinement > 12) {
    throw ConfigError(fmt::format("refinement = {} must lie in [0, 12]", refinement));
  }
  if (replicas < 1) throw ConfigError(fmt::format("replicas = {} must be >= 1", replicas));
  if (record_count < 2) throw ConfigError(fmt::format("record_count = {} must be >= 2", record_count));
  if (threads < 0) throw ConfigError(fmt::format("threads = {} must be >= 0", threads));
  if (l < 0) throw ConfigError(fmt::format("l = {} must be >= 0 (0 selects the default)", l));
  if (!(l_exponent > 0.0 && l_exponent < 1.0)) {
    throw ConfigError(fmt::format("l_exponent = {} must lie in (0, 1)", l_exponent));
  }
  if (Ns.empty() || ls.empty()) throw ConfigError("Ns and ls must be non-empty");

  std::vector<int> sizes = Ns;
  sizes.push_back(N);
  for (int n : sizes) {
    if (n < 8) throw ConfigError(fmt::format("N = {} must be at least 8", n));
    const double bound = theta / (n * sigma_for(n));
    if (dt > bound * (1.0 + 1e-12)) {
      throw ConfigError(fmt::format(
          "dt = {} violates the stability bound dt <= theta/(N sigma) = {} at N = {} (theta = {}, sigma = {})", dt,
          bound, n, theta, sigma_for(n)));
    }
    if (2 * block_size_for(n) > n) {
      throw ConfigError(fmt::format("block size l = {} too large for N = {} (need 2 l <= N)", block_size_for(n), n));
    }
  }
  for (int b : ls) {
    if (b < 1) throw ConfigError(fmt::format("ls entry {} must be >= 1", b));
  }

  if (M < 4) throw ConfigError(fmt::format("M = {} must be at least 4", M));
  if (!(cfl > 0.0 && cfl < 1.0)) throw ConfigError(fmt::format("cfl = {} must lie in (0, 1)", cfl));
  if (!(delta1 > 0.0) || !(delta2 > 0.0)) {
    throw ConfigError(fmt::format("delta1 = {}, delta2 = {} must be positive", delta1, delta2));
  }
  if (ramp_times.empty()) throw ConfigError("ramp_times must be non-empty");
  for (double t1 : ramp_times) {
    if (!(t1 > 0.0)) throw ConfigError(fmt::format("ramp_times entry {} must be positive", t1));
  }
  if (!(settle_time >= 0.0)) throw ConfigError(fmt::format("settle_time = {} must be >= 0", settle_time));
  if (!(window_lo > 0.0 && window_lo < window_hi && window_hi < 1.0)) {
    throw ConfigError(fmt::format("comparison window [{}, {}] must satisfy 0 < window_lo < window_hi < 1",
                                  window_lo, window_hi));
  }
  schedule.validate();
}

std::string RunConfig::to_text() const
{
  std::string out;
  for (const auto& key : keys()) out += fmt::format("{} = {}\n", key.name, key.get(*this));
  return out;
}

RunConfig parse_config_text(std::string_view text, std::string_view source, std::string_view default_experiment)
{
  RunConfig cfg;
  cfg.experiment = std::string(default_experiment);
  std::map<std::string, int, std::less<>> seen;
  bool schedule_given = false;
  int line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(fmt::format("{}:{}: expected 'key = value', got '{}'", source, line_no, line));
    }
    const auto name = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    const auto& table = keys();
    const auto it = std::find_if(table.begin(), table.end(), [&](const Key& k) { return k.name == name; });
    if (it == table.end()) throw ConfigError(fmt::format("{}:{}: unknown key '{}'", source, line_no, name));
    if (const auto prev = seen.find(name); prev != seen.end()) {
      throw ConfigError(fmt::format("{}:{}: duplicate key '{}' (first set on line {})", source, line_no, name,
                                    prev->second));
    }
    seen.emplace(std::string(name), line_no);
    if (value.empty()) throw ConfigError(fmt::format("{}:{}: key '{}' has no value", source, line_no, name));
    try {
      it->set(cfg, value);
    } catch (const Error& e) {
      throw ConfigError(fmt::format("{}:{}: {}", source, line_no, e.what()));
    }
    if (name == "schedule") schedule_given = true;
  }
  if (!schedule_given) cfg.schedule.kind = preset_schedule(cfg.experiment);
  cfg.validate();
  return cfg;
}

RunConfig parse_config(const std::filesystem::path& path, std::string_view default_experiment)
{
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config file '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path.string(), default_experiment);
}

}  // namespace hydrochain
