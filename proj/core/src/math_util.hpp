#pragma once

#include <cmath>
#include <cstdint>

namespace labornet::detail {

// Reentrant ln Gamma; std::lgamma writes the global signgam.
inline double log_gamma(double x) {
  int sign = 0;
  return ::lgamma_r(x, &sign);
}

inline double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

inline double log_choose(double n, double k) {
  return log_gamma(n + 1.0) - log_gamma(k + 1.0) - log_gamma(n - k + 1.0);
}

}  // namespace labornet::detail
