#pragma once

#include <string>
#include <string_view>

namespace hydrochain {

/// Boundary tension protocol tau_bar(t).
///
/// - constant: tau0 for all t
/// - ramp: tau0 -> tau1 over [0, ramp_time] with a cubic ease (bounded
///   derivative), then held at tau1
/// - step: tau0 before step_time, tau1 from step_time on
struct TensionSchedule
{
  enum class Kind { Constant, Ramp, Step };

  Kind kind = Kind::Constant;
  double tau0 = 0.0;
  double tau1 = 0.0;
  double ramp_time = 1.0;
  double step_time = 0.0;

  static TensionSchedule constant(double tau);
  static TensionSchedule ramp(double tau0, double tau1, double ramp_time);
  static TensionSchedule step(double tau0, double tau1, double step_time = 0.0);

  double operator()(double t) const noexcept;
  double final_tension() const noexcept;

  void validate() const;
};

std::string_view to_string(TensionSchedule::Kind kind) noexcept;
TensionSchedule::Kind schedule_kind_from_string(std::string_view name);

}  // namespace hydrochain
