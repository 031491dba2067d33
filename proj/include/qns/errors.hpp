#pragma once

#include <stdexcept>
#include <string>

namespace qns {

/// Invalid user input (config keys, parameter bounds, bad arguments).
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Density dropped below the vacuum floor in strict mode.
struct VacuumError : std::runtime_error {
  double time = 0.0;
  std::size_t node = 0;
  double min_value = 0.0;
  VacuumError(const std::string& what, double t, std::size_t at, double mn)
      : std::runtime_error(what), time(t), node(at), min_value(mn) {}
};

/// NaN/Inf detected or an unrecoverable solver failure.
struct NumericsError : std::runtime_error {
  double time = 0.0;
  NumericsError(const std::string& what, double t = 0.0)
      : std::runtime_error(what), time(t) {}
};

}  // namespace qns
