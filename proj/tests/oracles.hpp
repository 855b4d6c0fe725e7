#pragma once

// Test-only reference computations, deliberately independent of the library.

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <numbers>
#include <vector>

namespace oracle {

inline double heat(double s, double x) {
  return std::exp(-x * x / (2.0 * s)) / std::sqrt(2.0 * std::numbers::pi * s);
}

// int_0^t p(s,x) ds with s = v^2, which removes the 1/sqrt(s) endpoint singularity.
inline double local_time_quadrature(double t, double x) {
  if (t == 0.0) return 0.0;
  auto f = [x](double v) {
    if (v == 0.0) return x == 0.0 ? 2.0 / std::sqrt(2.0 * std::numbers::pi) : 0.0;
    return 2.0 * v * heat(v * v, x);
  };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, std::sqrt(t), 15, 1e-14);
}

// -int |x - y| f(y) dy by adaptive quadrature split at x.
template <typename Density>
double potential_quadrature(Density f, double k, double x) {
  auto integrand = [&](double y) { return std::abs(x - y) * f(y); };
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  if (x <= -k || x >= k) return -GK::integrate(integrand, -k, k, 15, 1e-13);
  return -(GK::integrate(integrand, -k, x, 15, 1e-13) + GK::integrate(integrand, x, k, 15, 1e-13));
}

inline double trapezoid(const std::vector<double>& v, double h) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) s += 0.5 * h * (v[i] + v[i + 1]);
  return s;
}

// Ordinary least squares R^2 of y against x.
inline double r_squared(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i] / n, my += y[i] / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return syy == 0.0 ? 1.0 : sxy * sxy / (sxx * syy);
}

}  // namespace oracle
