#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "rootbarrier/barrier.hpp"
#include "rootbarrier/embedding.hpp"
#include "rootbarrier/errors.hpp"
#include "rootbarrier/parallel.hpp"
#include "rootbarrier/rng.hpp"

namespace rootbarrier {

struct ParabolicDomain;

using Curve = std::function<double(double)>;
using SpaceTimeFunction = std::function<double(double, double)>;
using RhoFunction = std::function<double(const ParabolicDomain&, double, double)>;

/// Space-time domain {(t, x) : 0 < t < T, lower(t) < x < upper(t)} for
/// d_t u + u_xx / 2 = 0 with data g on the parabolic boundary.
struct ParabolicDomain {
  double T = 1.0;
  Curve lower;
  Curve upper;
  double lipschitz_lower = 0.0;
  double lipschitz_upper = 0.0;
  RhoFunction rho;  // empty: default_rho
  SpaceTimeFunction boundary_data;
};

inline constexpr double kContainmentSlack = 1e-12;

inline void require_closure(const ParabolicDomain& dom, double t, double x) {
  if (!(t >= -kContainmentSlack && t <= dom.T + kContainmentSlack) ||
      !(x >= dom.lower(t) - kContainmentSlack && x <= dom.upper(t) + kContainmentSlack)) {
    throw std::domain_error("point (" + format_double(t) + ", " + format_double(x) +
                            ") lies outside the closed domain");
  }
}

/// min(x - lower(t), upper(t) - x, sqrt(T - t)); zero on the parabolic boundary.
inline double parabolic_distance(const ParabolicDomain& dom, double t, double x) {
  require_closure(dom, t, x);
  const double d = std::min({x - dom.lower(t), dom.upper(t) - x, std::sqrt(std::max(dom.T - t, 0.0))});
  return std::max(d, 0.0);
}

/// Side distances shrunk by 1/(1 + Lipschitz constant), capped by sqrt(T - t).
inline double default_rho(const ParabolicDomain& dom, double t, double x) {
  return std::min({(dom.upper(t) - x) / (1.0 + dom.lipschitz_upper), (x - dom.lower(t)) / (1.0 + dom.lipschitz_lower),
                   std::sqrt(std::max(dom.T - t, 0.0))});
}

inline double safe_radius(const ParabolicDomain& dom, double t, double x) {
  return dom.rho ? dom.rho(dom, t, x) : default_rho(dom, t, x);
}

struct ChainResult {
  double tau = 0.0;
  double m = 0.0;
  std::size_t steps = 0;
};

inline constexpr std::size_t kMaxChainSteps = 1'000'000;

/// Random walk over Root barriers from (t0, x0).
///
/// Stops in the shell {d_D <= delta}; otherwise steps
/// (tau, M) += (rho^2 r(U), rho U) with U ~ U[-1,1]. A radius below
/// delta / (1 + max Lipschitz constant) also stops the chain: default_rho never
/// gets there outside the shell, but a custom rho that is not comparable to
/// d_D (e.g. linear in T - t) would otherwise crawl towards the boundary.
/// Every visited point is checked against the closed domain.
inline ChainResult walk_chain(const ParabolicDomain& dom, const BarrierTable& table, double t0, double x0,
                              double delta, RngStream& stream) {
  if (!(delta > 0.0)) throw ConfigError("walk_chain: delta must be positive");
  require_closure(dom, t0, x0);
  const double rho_floor = delta / (1.0 + std::max(dom.lipschitz_lower, dom.lipschitz_upper));
  ChainResult state{t0, x0, 0};
  while (true) {
    if (parabolic_distance(dom, state.tau, state.m) <= delta) return state;
    const double rho = safe_radius(dom, state.tau, state.m);
    if (rho <= rho_floor) return state;
    if (state.steps == kMaxChainSteps) {
      throw NumericalError("walk_chain: more than 1e6 steps; check the safe radius");
    }
    const IncrementSample inc = sample_increment(table, rho, stream);
    state.tau += inc.dt;
    state.m += inc.dx;
    ++state.steps;
    const double t = state.tau;
    if (!(t <= dom.T + kContainmentSlack) || !(state.m >= dom.lower(t) - kContainmentSlack) ||
        !(state.m <= dom.upper(t) + kContainmentSlack)) {
      throw InvariantViolation("walk_chain: step " + std::to_string(state.steps) + " left the domain at (" +
                               format_double(t) + ", " + format_double(state.m) + ")");
    }
  }
}

/// Nearest parabolic-boundary point: (T, m) when sqrt(T - tau) attains the
/// minimum distance, otherwise the nearer side curve (lower on a tie).
inline std::pair<double, double> project_to_boundary(const ParabolicDomain& dom, double tau, double m) {
  const double to_lower = m - dom.lower(tau);
  const double to_upper = dom.upper(tau) - m;
  const double to_terminal = std::sqrt(std::max(dom.T - tau, 0.0));
  if (to_terminal <= std::min(to_lower, to_upper)) return {dom.T, m};
  if (to_lower <= to_upper) return {tau, dom.lower(tau)};
  return {tau, dom.upper(tau)};
}

struct WalkStats {
  double estimate = 0.0;
  double std_error = 0.0;
  double mean_steps = 0.0;
  std::size_t samples = 0;
  double delta = 0.0;
};

/// Monte Carlo estimate of u(t0, x0) from boundary data at projected exit
/// points. Chain i uses stream.substream(i); sums are pairwise in chain order,
/// so the result is independent of `workers`.
inline WalkStats solve_pde(const ParabolicDomain& dom, const BarrierTable& table, double t0, double x0, double delta,
                           std::size_t samples, const RngStream& stream, std::size_t workers = 1) {
  if (samples == 0) throw ConfigError("solve_pde: samples must be >= 1");
  if (samples > std::numeric_limits<std::uint32_t>::max()) throw ConfigError("solve_pde: too many samples");
  if (!dom.boundary_data) throw ConfigError("solve_pde: domain has no boundary data");
  require_unit_uniform_table(table);
  std::vector<double> values(samples);
  std::vector<double> steps(samples);
  parallel_for(samples, workers, [&](std::size_t i) {
    RngStream s = stream.substream(static_cast<std::uint32_t>(i));
    const ChainResult end = walk_chain(dom, table, t0, x0, delta, s);
    const auto [tb, xb] = project_to_boundary(dom, end.tau, end.m);
    values[i] = dom.boundary_data(tb, xb);
    steps[i] = static_cast<double>(end.steps);
  });
  const SampleMoments m = sample_moments(values);
  return {m.mean, m.std_error, pairwise_sum(steps) / static_cast<double>(samples), samples, delta};
}

// ---- Example with explicit solution -------------------------------------

/// u(t,x) = 4x^4 + 24(1-t)x^2 + 12(1-t)^2, a polynomial solution of
/// d_t u + u_xx / 2 = 0 with u(0,1) = 40.
inline double quartic_solution(double t, double x) {
  const double s = 1.0 - t;
  const double x2 = x * x;
  return 4.0 * x2 * x2 + 24.0 * s * x2 + 12.0 * s * s;
}

/// min((2 - t - x)/sqrt(2), 1 - t, x) for the domain 0 < x < 2 - t.
inline double quartic_wedge_rho(const ParabolicDomain&, double t, double x) {
  return std::min({(2.0 - t - x) / std::numbers::sqrt2, 1.0 - t, x});
}

/// T = 1, lower = 0, upper = 2 - t, boundary data = quartic_solution.
inline ParabolicDomain quartic_domain(bool wedge_rho = false) {
  ParabolicDomain dom;
  dom.T = 1.0;
  dom.lower = [](double) { return 0.0; };
  dom.upper = [](double t) { return 2.0 - t; };
  dom.lipschitz_lower = 0.0;
  dom.lipschitz_upper = 1.0;
  if (wedge_rho) dom.rho = quartic_wedge_rho;
  dom.boundary_data = quartic_solution;
  return dom;
}

// ---- Config -------------------------------------------------------------

namespace detail {

struct ParsedCurve {
  Curve curve;
  double lipschitz = 0.0;
};

// Piecewise-linear interpolation on ascending knots, constant beyond the ends.
inline double interpolate_knots(const std::vector<double>& ts, const std::vector<double>& xs, double t) {
  if (t <= ts.front()) return xs.front();
  if (t >= ts.back()) return xs.back();
  const auto it = std::upper_bound(ts.begin(), ts.end(), t);
  const std::size_t j = static_cast<std::size_t>(it - ts.begin());
  const double w = (t - ts[j - 1]) / (ts[j] - ts[j - 1]);
  return xs[j - 1] + w * (xs[j] - xs[j - 1]);
}

inline ParsedCurve curve_from_json(const nlohmann::json& j, const char* name) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "affine") {
    // a + b t
    const double a = j.at("a").get<double>();
    const double b = j.at("b").get<double>();
    return {[a, b](double t) { return a + b * t; }, std::abs(b)};
  }
  if (kind == "samples") {
    auto ts = j.at("t").get<std::vector<double>>();
    auto xs = j.at("x").get<std::vector<double>>();
    if (ts.size() < 2 || ts.size() != xs.size()) {
      throw ConfigError(std::string(name) + ": samples need matching t and x arrays of length >= 2");
    }
    double lip = 0.0;
    for (std::size_t i = 1; i < ts.size(); ++i) {
      if (!(ts[i] > ts[i - 1])) throw ConfigError(std::string(name) + ": sample times must increase");
      lip = std::max(lip, std::abs(xs[i] - xs[i - 1]) / (ts[i] - ts[i - 1]));
    }
    return {[ts = std::move(ts), xs = std::move(xs)](double t) { return interpolate_knots(ts, xs, t); }, lip};
  }
  throw ConfigError(std::string(name) + ": unknown curve kind '" + kind + "'");
}

// Bilinear interpolation of values[i][j] at (t[i], x[j]), clamped at the edges.
inline SpaceTimeFunction table_data_from_json(const nlohmann::json& j) {
  auto ts = j.at("t").get<std::vector<double>>();
  auto xs = j.at("x").get<std::vector<double>>();
  auto vals = j.at("values").get<std::vector<std::vector<double>>>();
  if (ts.size() < 2 || xs.size() < 2 || vals.size() != ts.size()) {
    throw ConfigError("boundary_data: expression-table needs t, x (length >= 2) and values[t][x]");
  }
  for (const auto& row : vals) {
    if (row.size() != xs.size()) throw ConfigError("boundary_data: values rows must match x length");
  }
  if (!std::is_sorted(ts.begin(), ts.end()) || !std::is_sorted(xs.begin(), xs.end())) {
    throw ConfigError("boundary_data: t and x must be ascending");
  }
  return [ts = std::move(ts), xs = std::move(xs), vals = std::move(vals)](double t, double x) {
    auto locate = [](const std::vector<double>& grid, double v) {
      v = std::clamp(v, grid.front(), grid.back());
      std::size_t j = static_cast<std::size_t>(std::upper_bound(grid.begin(), grid.end(), v) - grid.begin());
      j = std::clamp<std::size_t>(j, 1, grid.size() - 1);
      const double w = (v - grid[j - 1]) / (grid[j] - grid[j - 1]);
      return std::pair{j - 1, w};
    };
    const auto [i, wt] = locate(ts, t);
    const auto [k, wx] = locate(xs, x);
    const double lo = (1.0 - wx) * vals[i][k] + wx * vals[i][k + 1];
    const double hi = (1.0 - wx) * vals[i + 1][k] + wx * vals[i + 1][k + 1];
    return (1.0 - wt) * lo + wt * hi;
  };
}

}  // namespace detail

/// {"T":.., "lower":{..}, "upper":{..}, "boundary_data":{..}, "rho":"default"|"quartic-wedge"}
inline ParabolicDomain domain_from_json(const nlohmann::json& j) {
  try {
    ParabolicDomain dom;
    dom.T = j.at("T").get<double>();
    if (!(dom.T > 0.0)) throw ConfigError("problem config: T must be positive");
    auto lower = detail::curve_from_json(j.at("lower"), "lower");
    auto upper = detail::curve_from_json(j.at("upper"), "upper");
    dom.lower = std::move(lower.curve);
    dom.upper = std::move(upper.curve);
    dom.lipschitz_lower = lower.lipschitz;
    dom.lipschitz_upper = upper.lipschitz;
    for (int i = 0; i <= 64; ++i) {
      const double t = dom.T * static_cast<double>(i) / 64.0;
      if (!(dom.lower(t) < dom.upper(t)) && i > 0 && i < 64) {
        throw ConfigError("problem config: lower(t) must stay below upper(t)");
      }
    }
    const auto& data = j.at("boundary_data");
    const std::string kind = data.at("kind").get<std::string>();
    if (kind == "quartic") {
      dom.boundary_data = quartic_solution;
    } else if (kind == "expression-table") {
      dom.boundary_data = detail::table_data_from_json(data);
    } else {
      throw ConfigError("boundary_data: unknown kind '" + kind + "'");
    }
    const std::string rho = j.value("rho", std::string("default"));
    if (rho == "quartic-wedge") {
      dom.rho = quartic_wedge_rho;
    } else if (rho != "default") {
      throw ConfigError("problem config: rho must be \"default\" or \"quartic-wedge\"");
    }
    return dom;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("problem config: ") + e.what());
  }
}

}  // namespace rootbarrier
