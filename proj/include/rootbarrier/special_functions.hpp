#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rootbarrier {

/// Gaussian density of Brownian motion at time t: p(t,x) = exp(-x^2/2t)/sqrt(2 pi t).
inline double heat_kernel(double t, double x) {
  if (!(t > 0.0)) throw std::domain_error("heat_kernel: time must be positive");
  return std::exp(-x * x / (2.0 * t)) / std::sqrt(2.0 * std::numbers::pi * t);
}

/// Expected Brownian local time at level x up to time t,
///   g(t,x) = sqrt(2t/pi) exp(-x^2/2t) - |x| erfc(|x|/sqrt(2t)),
/// which is also the time integral of heat_kernel(s,x) over [0,t].
///
/// g(0,x) = 0. Negative times are rejected; callers that form t as a
/// difference of barrier values clamp first.
inline double expected_local_time(double t, double x) {
  if (t < 0.0 || std::isnan(t)) {
    throw std::domain_error("expected_local_time: time must be nonnegative");
  }
  if (t == 0.0) return 0.0;
  const double ax = std::abs(x);
  if (ax == 0.0) return std::sqrt(2.0 * t / std::numbers::pi);
  const double s = std::sqrt(2.0 * t);
  const double z = ax / s;
  // Both terms underflow together far from the origin.
  if (z > 27.0) return 0.0;
  const double value = s / std::sqrt(std::numbers::pi) * std::exp(-z * z) - ax * std::erfc(z);
  return value > 0.0 ? value : 0.0;
}

/// E|x + sqrt(t) Z| for standard normal Z. Equals |x| at t = 0.
inline double expected_abs_gaussian(double t, double x) {
  if (t < 0.0) throw std::domain_error("expected_abs_gaussian: time must be nonnegative");
  if (t == 0.0) return std::abs(x);
  const double sigma = std::sqrt(t);
  return sigma * std::sqrt(2.0 / std::numbers::pi) * std::exp(-x * x / (2.0 * t)) +
         x * std::erf(x / (sigma * std::numbers::sqrt2));
}

}  // namespace rootbarrier
