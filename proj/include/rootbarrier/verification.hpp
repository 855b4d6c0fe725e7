#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "rootbarrier/barrier.hpp"
#include "rootbarrier/errors.hpp"
#include "rootbarrier/measures.hpp"
#include "rootbarrier/parallel.hpp"
#include "rootbarrier/rng.hpp"
#include "rootbarrier/special_functions.hpp"

namespace rootbarrier {

struct HittingResult {
  double tau = 0.0;
  double b_tau = 0.0;
  double max_excursion = 0.0;   // running max of |B - x0| up to tau
  double last_increment = 0.0;  // |B_tau - B_{tau - dt}| on this grid
  std::size_t steps = 0;
};

/// Monitors one Gaussian path on several nested grids at once.
///
/// The path is generated with step dt_fine; level l observes it every 2^l
/// fine steps (grid spacing dt_fine 2^l) and stops at the first observed
/// time t > 0 with t >= r(B_t). All levels share the same Brownian path.
inline std::vector<HittingResult> simulate_hitting_levels(const BarrierTable& table, double dt_fine,
                                                          std::size_t levels, RngStream& stream,
                                                          double x0 = 0.0) {
  if (!(dt_fine > 0.0)) throw ConfigError("simulate_hitting: dt_grid must be positive");
  if (levels == 0 || levels > 16) throw ConfigError("simulate_hitting: levels must be in 1..16");
  const double cap = 10.0 * std::max(table.r0(), dt_fine);
  const double sd = std::sqrt(dt_fine);

  std::vector<HittingResult> out(levels);
  std::vector<bool> done(levels, false);
  std::vector<double> last_seen(levels, x0);
  std::size_t remaining = levels;
  double b = x0;
  double excursion = 0.0;
  for (std::uint64_t step = 1; remaining > 0; ++step) {
    b += sd * stream.normal();
    excursion = std::max(excursion, std::abs(b - x0));
    for (std::size_t l = 0; l < levels; ++l) {
      if (done[l] || (step & ((std::uint64_t{1} << l) - 1)) != 0) continue;
      const double t = static_cast<double>(step) * dt_fine;
      if (t >= table(b)) {
        out[l] = {t, b, excursion, std::abs(b - last_seen[l]), static_cast<std::size_t>(step >> l)};
        done[l] = true;
        --remaining;
      } else if (t > cap) {
        throw NumericalError("simulate_hitting: path not stopped by time 10 r(0); barrier table is broken");
      }
      last_seen[l] = b;
    }
  }
  return out;
}

/// First grid time t with t >= r(B_t) for a path started at x0 with
/// independent N(0, dt_grid) increments.
inline HittingResult simulate_hitting(const BarrierTable& table, double dt_grid, RngStream& stream,
                                      double x0 = 0.0) {
  return simulate_hitting_levels(table, dt_grid, 1, stream, x0).front();
}

/// Kolmogorov-Smirnov distance between the sample and U[-k,k].
inline double ks_statistic_uniform(std::vector<double> sample, double k) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double cdf = std::clamp((sample[i] + k) / (2.0 * k), 0.0, 1.0);
    d = std::max({d, static_cast<double>(i + 1) / n - cdf, cdf - static_cast<double>(i) / n});
  }
  return d;
}

/// Asymptotic 1% critical value of the one-sample KS statistic.
inline double ks_critical_value_1pct(std::size_t n) { return 1.63 / std::sqrt(static_cast<double>(n)); }

struct RefinementLevel {
  double dt_grid = 0.0;
  double ks_statistic = 0.0;
  double mean_tau = 0.0;
  double tau_std_error = 0.0;
  double mean_hit_gap = 0.0;
  double mean_steps = 0.0;
};

struct EmbeddingTestReport {
  std::size_t n_paths = 0;
  double dt_grid = 0.0;
  double ks_statistic = 0.0;
  double ks_threshold = 0.0;
  double mean_tau = 0.0;
  double tau_std_error = 0.0;
  double mean_tau_sq = 0.0;
  double max_tau = 0.0;
  double max_excursion = 0.0;
  double hit_gap_max = 0.0;    // max |tau - r(B_tau)|
  double hit_gap_bound = 0.0;    // dt_grid + Lip(r) * max last grid increment
  // Wald: E[tau] = E[B_tau^2] = k^2/3. Bias estimated from the finest two
  // levels assuming O(sqrt(dt)) convergence.
  double wald_target = 0.0;
  double wald_bias_estimate = 0.0;
  bool bias_decreasing = false;
  std::vector<RefinementLevel> refinement;  // finest grid first

  bool ks_passed() const { return ks_statistic <= ks_threshold; }
  bool wald_passed() const {
    return std::abs(mean_tau - wald_target) <= 3.0 * tau_std_error + wald_bias_estimate;
  }
  bool hit_gap_passed() const { return hit_gap_max <= hit_gap_bound; }
};

/// Simulates n_paths hitting points of the barrier for U[-k,k] on the grid
/// dt_grid and on `levels - 1` coarser grids (2 dt, 4 dt, ...) along the same
/// paths. Path i uses stream.substream(i), so the report does not depend on
/// the worker count.
inline EmbeddingTestReport ks_embedding_test(const BarrierTable& table, std::size_t n_paths, double dt_grid,
                                             const RngStream& stream, std::size_t workers = 1,
                                             std::size_t levels = 3) {
  if (n_paths < 2) throw ConfigError("ks_embedding_test: need at least 2 paths");
  if (n_paths > std::numeric_limits<std::uint32_t>::max()) throw ConfigError("ks_embedding_test: too many paths");
  std::vector<std::vector<HittingResult>> results(n_paths);
  parallel_for(n_paths, workers, [&](std::size_t i) {
    RngStream s = stream.substream(static_cast<std::uint32_t>(i));
    results[i] = simulate_hitting_levels(table, dt_grid, levels, s);
  });

  EmbeddingTestReport report;
  report.n_paths = n_paths;
  report.dt_grid = dt_grid;
  report.ks_threshold = ks_critical_value_1pct(n_paths);
  report.wald_target = table.k() * table.k() / 3.0;

  std::vector<double> positions(n_paths), taus(n_paths), gaps(n_paths), steps(n_paths);
  for (std::size_t l = 0; l < levels; ++l) {
    for (std::size_t i = 0; i < n_paths; ++i) {
      const HittingResult& h = results[i][l];
      positions[i] = h.b_tau;
      taus[i] = h.tau;
      gaps[i] = std::abs(h.tau - table(h.b_tau));
      steps[i] = static_cast<double>(h.steps);
    }
    const SampleMoments tau = sample_moments(taus);
    RefinementLevel level;
    level.dt_grid = dt_grid * static_cast<double>(std::uint64_t{1} << l);
    level.ks_statistic = ks_statistic_uniform(positions, table.k());
    level.mean_tau = tau.mean;
    level.tau_std_error = tau.std_error;
    level.mean_hit_gap = pairwise_sum(gaps) / static_cast<double>(n_paths);
    level.mean_steps = pairwise_sum(steps) / static_cast<double>(n_paths);
    report.refinement.push_back(level);

    if (l == 0) {
      report.ks_statistic = level.ks_statistic;
      report.mean_tau = tau.mean;
      report.tau_std_error = tau.std_error;
      std::vector<double> tau_sq(n_paths);
      std::transform(taus.begin(), taus.end(), tau_sq.begin(), [](double t) { return t * t; });
      report.mean_tau_sq = pairwise_sum(tau_sq) / static_cast<double>(n_paths);
      double max_last = 0.0;
      for (std::size_t i = 0; i < n_paths; ++i) {
        const HittingResult& h = results[i][0];
        report.max_tau = std::max(report.max_tau, h.tau);
        report.max_excursion = std::max(report.max_excursion, h.max_excursion);
        report.hit_gap_max = std::max(report.hit_gap_max, gaps[i]);
        max_last = std::max(max_last, h.last_increment);
      }
      report.hit_gap_bound = dt_grid + table.lipschitz_constant() * max_last;
    }
  }

  // Discretization bias shrinks with dt: the mean gap tau - r(B_tau) must fall
  // level by level, and successive E[tau] differences (same paths, so the
  // Monte Carlo noise largely cancels) must not grow.
  report.bias_decreasing = levels >= 2;
  for (std::size_t l = 0; l + 1 < levels; ++l) {
    report.bias_decreasing = report.bias_decreasing &&
                             report.refinement[l].mean_hit_gap < report.refinement[l + 1].mean_hit_gap;
  }
  for (std::size_t l = 0; l + 2 < levels; ++l) {
    const double fine = std::abs(report.refinement[l].mean_tau - report.refinement[l + 1].mean_tau);
    const double coarse = std::abs(report.refinement[l + 1].mean_tau - report.refinement[l + 2].mean_tau);
    report.bias_decreasing = report.bias_decreasing && fine <= coarse;
  }
  if (levels >= 2) {
    report.wald_bias_estimate =
        std::abs(report.refinement[1].mean_tau - report.refinement[0].mean_tau) / (std::sqrt(2.0) - 1.0);
  }
  return report;
}

struct FreeBoundaryQuadrature {
  std::size_t panels = 2000;  // Simpson panels across [-k, k]
};

namespace detail {

template <typename F>
double composite_simpson(F&& f, double a, double b, std::size_t panels) {
  if (!(b > a)) return 0.0;
  panels = std::max<std::size_t>(panels, 1);
  const double h = (b - a) / static_cast<double>(2 * panels);
  double sum = f(a) + f(b);
  for (std::size_t i = 1; i < 2 * panels; ++i) {
    sum += f(a + static_cast<double>(i) * h) * (i % 2 == 1 ? 4.0 : 2.0);
  }
  return sum * h / 3.0;
}

}  // namespace detail

/// Value function of the barrier,
///   u^r(t,x) = -int |y| p(t, x-y) dy + int_0^t int 1{s >= r(y)} p(t-s, x-y) mu(dy) ds.
/// The Gaussian term is closed form. In the second term the s-integral is
/// exact, int_{r(y)}^t p(t-s, x-y) ds = g(t - r(y), x - y), and the y-integral
/// over {|y| > level_crossing(t)} uses composite Simpson with breakpoints at
/// the barrier level, at y = x and at +-k.
inline double free_boundary_value(const BarrierTable& table, const SymmetricMeasure& mu, double t, double x,
                                  FreeBoundaryQuadrature quad = {}) {
  if (t < 0.0) throw std::domain_error("free_boundary_value: t must be nonnegative");
  double value = -expected_abs_gaussian(t, x);
  if (t == 0.0) return value;
  const double k = mu.k();
  const double xi = std::min(table.level_crossing(t), k);
  auto integrand = [&](double y) {
    return expected_local_time(std::max(t - table(y), 0.0), x - y) * mu.density(y);
  };
  auto integrate = [&](double a, double b) {
    std::vector<double> cuts{a, b};
    if (x > a && x < b) cuts.insert(cuts.begin() + 1, x);
    double sum = 0.0;
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
      const double len = cuts[c + 1] - cuts[c];
      const auto panels = static_cast<std::size_t>(std::ceil(len / (2.0 * k) * static_cast<double>(quad.panels)));
      sum += detail::composite_simpson(integrand, cuts[c], cuts[c + 1], std::max<std::size_t>(panels, 2));
    }
    return sum;
  };
  value += integrate(xi, k) + integrate(-k, -xi);
  return value;
}

struct ObstacleReport {
  double max_obstacle_violation = 0.0;  // max over grid of (u_mu - u^r)^+
  double max_contact_gap = 0.0;         // max over nodes of |u^r(r(x), x) - u_mu(x)|
  double max_initial_gap = 0.0;         // max over x of |u^r(0,x) + |x||
  double quadrature_change = 0.0;       // max |u^r(N) - u^r(2N)| over all evaluations
  std::size_t grid_points = 0;
  std::size_t contact_nodes = 0;
};

/// Checks u^r >= u_mu on the tensor grid t_grid x x_grid and
/// u^r(r(x), x) = u_mu(x) on contact_x. Every value is computed with
/// quad.panels and 2 quad.panels Simpson panels; a change above
/// max_quadrature_change raises NumericalError naming the node.
inline ObstacleReport obstacle_check(const BarrierTable& table, const SymmetricMeasure& mu,
                                     std::span<const double> t_grid, std::span<const double> x_grid,
                                     std::span<const double> contact_x, FreeBoundaryQuadrature quad = {},
                                     double max_quadrature_change = 1e-4) {
  ObstacleReport report;
  const FreeBoundaryQuadrature fine{2 * quad.panels};
  auto evaluate = [&](double t, double x) {
    const double coarse_value = free_boundary_value(table, mu, t, x, quad);
    const double fine_value = free_boundary_value(table, mu, t, x, fine);
    const double change = std::abs(fine_value - coarse_value);
    if (change > max_quadrature_change) {
      throw NumericalError("obstacle_check: quadrature not converged at (t, x) = (" + format_double(t) + ", " +
                           format_double(x) + "), change " + format_double(change));
    }
    report.quadrature_change = std::max(report.quadrature_change, change);
    return fine_value;
  };
  for (double t : t_grid) {
    for (double x : x_grid) {
      const double ur = evaluate(t, x);
      report.max_obstacle_violation = std::max(report.max_obstacle_violation, mu.potential(x) - ur);
      if (t == 0.0) report.max_initial_gap = std::max(report.max_initial_gap, std::abs(ur - dirac_potential(x)));
      ++report.grid_points;
    }
  }
  for (double x : contact_x) {
    const double ur = evaluate(table(x), x);
    report.max_contact_gap = std::max(report.max_contact_gap, std::abs(ur - mu.potential(x)));
    ++report.contact_nodes;
  }
  return report;
}

}  // namespace rootbarrier
