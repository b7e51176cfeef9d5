#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>

namespace admlab {

/// Raised for malformed arguments: non-finite samples, bad intervals, misaligned inputs.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a resolvent is requested at a point of the spectrum.
class SingularResolvent : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline void require(bool condition, const std::string& message) {
  if (!condition) throw InvalidInput(message);
}

/// Hölder conjugate of p in [1, inf].
inline double conjugate_exponent(double p) {
  require(p >= 1.0, "exponent must lie in [1, inf]");
  if (p == 1.0) return kInf;
  if (std::isinf(p)) return 1.0;
  return p / (p - 1.0);
}

/// Round-trip decimal formatting used by every report writer.
inline std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace admlab
