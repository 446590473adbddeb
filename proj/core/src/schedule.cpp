#include "hydrochain/schedule.hpp"

#include <cmath>

#include <fmt/format.h>

#include "hydrochain/error.hpp"

namespace hydrochain {

TensionSchedule TensionSchedule::constant(double tau)
{
  return {Kind::Constant, tau, tau, 1.0, 0.0};
}

TensionSchedule TensionSchedule::ramp(double tau0, double tau1, double ramp_time)
{
  return {Kind::Ramp, tau0, tau1, ramp_time, 0.0};
}

TensionSchedule TensionSchedule::step(double tau0, double tau1, double step_time)
{
  return {Kind::Step, tau0, tau1, 1.0, step_time};
}

double TensionSchedule::operator()(double t) const noexcept
{
  switch (kind) {
    case Kind::Constant:
      return tau0;
    case Kind::Ramp: {
      if (t <= 0.0) return tau0;
      if (t >= ramp_time) return tau1;
      const double s = t / ramp_time;
      return tau0 + (tau1 - tau0) * s * s * (3.0 - 2.0 * s);
    }
    case Kind::Step:
      return t < step_time ? tau0 : tau1;
  }
  return tau0;
}

double TensionSchedule::final_tension() const noexcept
{
  return kind == Kind::Constant ? tau0 : tau1;
}

void TensionSchedule::validate() const
{
  if (!std::isfinite(tau0) || !std::isfinite(tau1)) {
    throw ConfigError("tension schedule: tau0 and tau1 must be finite");
  }
  if (kind == Kind::Ramp && !(ramp_time > 0.0)) {
    throw ConfigError(fmt::format("tension schedule: ramp_time = {} must be positive", ramp_time));
  }
  if (kind == Kind::Step && !(step_time >= 0.0)) {
    throw ConfigError(fmt::format("tension schedule: step_time = {} must be >= 0", step_time));
  }
}

std::string_view to_string(TensionSchedule::Kind kind) noexcept
{
  switch (kind) {
    case TensionSchedule::Kind::Constant: return "constant";
    case TensionSchedule::Kind::Ramp: return "ramp";
    case TensionSchedule::Kind::Step: return "step";
  }
  return "constant";
}

TensionSchedule::Kind schedule_kind_from_string(std::string_view name)
{
  if (name == "constant") return TensionSchedule::Kind::Constant;
  if (name == "ramp") return TensionSchedule::Kind::Ramp;
  if (name == "step") return TensionSchedule::Kind::Step;
  throw ConfigError(fmt::format("unknown tension schedule '{}' (expected constant, ramp or step)", name));
}

}  // namespace hydrochain
