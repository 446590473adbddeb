#pragma once

#include <stdexcept>
#include <string>

namespace hydrochain {

/// Base for every error raised by the library.
class Error : public std::runtime_error
{
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the domain of a mathematical function (e.g. non-finite strain).
class DomainError : public Error
{
 public:
  using Error::Error;
};

/// Site index outside the admissible block window.
class RangeError : public Error
{
 public:
  using Error::Error;
};

/// Quadrature or root finding failed to converge.
class NumericalError : public Error
{
 public:
  using Error::Error;
};

/// Invalid user configuration. The message names the violated rule.
class ConfigError : public Error
{
 public:
  using Error::Error;
};

/// Non-finite state produced by a time integrator.
class BlowUpError : public Error
{
 public:
  BlowUpError(const std::string& what, long long step, double time)
      : Error(what), step_(step), time_(time)
  {
  }

  long long step() const noexcept { return step_; }
  double time() const noexcept { return time_; }

 private:
  long long step_;
  double time_;
};

}  // namespace hydrochain
