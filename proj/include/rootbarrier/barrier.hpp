#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "rootbarrier/errors.hpp"
#include "rootbarrier/measures.hpp"
#include "rootbarrier/special_functions.hpp"
#include "rootbarrier/version.hpp"

namespace rootbarrier {

struct SolverMeta {
  double tol = 0.0;
  std::size_t total_iterations = 0;
  std::size_t max_node_iterations = 0;
  // Nodes 0..extrapolated_nodes-1 come from the even continuation A - B x^2
  // instead of the discrete equation.
  std::size_t extrapolated_nodes = 0;
  // Nodes whose root fell below r_{i+1} and were set to r_{i+1}.
  std::size_t monotone_projected = 0;
  nlohmann::json measure;  // measure descriptor, null when unknown
};

/// Barrier function r sampled at x_i = i h, h = k/n, i = 0..n.
///
/// Invariants (checked by from_values): n >= 1, values nonnegative and
/// finite, nonincreasing within 1e-10, values[n] == 0.
class BarrierTable {
 public:
  static BarrierTable from_values(double k, std::vector<double> values, SolverMeta meta = {}) {
    if (!(k > 0.0) || !std::isfinite(k)) throw ConfigError("barrier table: k must be positive");
    if (values.size() < 2) throw ConfigError("barrier table: need at least two nodes");
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!(values[i] >= 0.0) || !std::isfinite(values[i])) {
        throw InvariantViolation("barrier table: r[" + std::to_string(i) +
                                 "] is negative or not finite");
      }
      if (i > 0 && values[i] > values[i - 1] + 1e-10) {
        throw InvariantViolation("barrier table: r increases at node " + std::to_string(i));
      }
    }
    if (values.back() != 0.0) throw InvariantViolation("barrier table: r(k) must be 0");
    return BarrierTable(k, std::move(values), std::move(meta));
  }

  double k() const { return k_; }
  std::size_t n() const { return values_.size() - 1; }
  double h() const { return k_ / static_cast<double>(n()); }
  double x(std::size_t i) const { return i == n() ? k_ : static_cast<double>(i) * h(); }
  const std::vector<double>& values() const { return values_; }
  double r0() const { return values_.front(); }
  const SolverMeta& meta() const { return meta_; }

  /// r(|x|) by linear interpolation between nodes; 0 for |x| >= k.
  double operator()(double x) const {
    const double a = std::abs(x);
    if (a >= k_) return 0.0;
    const double pos = a / k_ * static_cast<double>(n());
    const std::size_t i = std::min(static_cast<std::size_t>(pos), n() - 1);
    const double w = pos - static_cast<double>(i);
    return values_[i] + w * (values_[i + 1] - values_[i]);
  }

  /// inf{y >= 0 : r(y) < t}: the set {y : r(y) < t} is {|y| > level_crossing(t)}.
  /// Returns 0 when t > r(0) and k when t <= 0.
  double level_crossing(double t) const {
    if (t > values_.front()) return 0.0;
    if (t <= 0.0) return k_;
    // first node with r < t; r is nonincreasing so this is a partition point
    const auto it = std::partition_point(values_.begin(), values_.end(),
                                         [t](double v) { return v >= t; });
    const std::size_t j = static_cast<std::size_t>(it - values_.begin());
    // r[j-1] >= t > r[j]
    const double hi = values_[j - 1];
    const double lo = values_[j];
    const double w = hi > lo ? (hi - t) / (hi - lo) : 0.0;
    return x(j - 1) + w * (x(j) - x(j - 1));
  }

  /// Largest slope |r_{i+1} - r_i| / h of the interpolant.
  double lipschitz_constant() const {
    double best = 0.0;
    for (std::size_t i = 0; i < n(); ++i) best = std::max(best, values_[i] - values_[i + 1]);
    return best / h();
  }

 private:
  BarrierTable(double k, std::vector<double> values, SolverMeta meta)
      : k_(k), values_(std::move(values)), meta_(std::move(meta)) {}

  double k_;
  std::vector<double> values_;
  SolverMeta meta_;
};

inline double evaluate_barrier(const BarrierTable& table, double x) { return table(x); }

namespace detail {

// Discretized integral equation at node i, as a function of the unknown r_i:
//   F_i(r) = g(r, x_i) - sum_{j>i} [g(r - r_j, x_i - x_j) + g(r - r_j, x_i + x_j)] m_j
//            - (u_delta(x_i) - u_mu(x_i))
// where m_j = int hat_j(y) mu(dy) is the exact mass of the piecewise-linear
// hat function at x_j. For a density that is linear between nodes this is
// f_j h (j < n) and f_n h / 2, the trapezoid rule; in general it keeps every
// weight positive and the weights sum to mu[0,k]. The potential on the left
// is that of the same lumped measure mu_h, so F_i is the exact equation for
// mu_h and F_i(r) ~ 2 mu_h[0,x_i] sqrt(2r/pi) > 0 for large r. The j = i term
// vanishes because g(0, .) = 0.
class DiscreteBarrierSystem {
 public:
  DiscreteBarrierSystem(const SymmetricMeasure& mu, std::size_t n) : n_(n), nodes_(n + 1), mass_(n + 1), lhs_(n + 1) {
    const double h = mu.k() / static_cast<double>(n);
    for (std::size_t j = 0; j <= n; ++j) nodes_[j] = j == n ? mu.k() : static_cast<double>(j) * h;
    // int_a^b (y - a) mu(dy) and int_a^b (b - y) mu(dy) over each cell
    for (std::size_t c = 0; c < n; ++c) {
      const double a = nodes_[c];
      const double b = nodes_[c + 1];
      const double mass = mu.mass_from_zero(b) - mu.mass_from_zero(a);
      const double moment = mu.first_moment_from_zero(b) - mu.first_moment_from_zero(a);
      const double rising = std::max(moment - a * mass, 0.0) / (b - a);
      const double falling = std::max(b * mass - moment, 0.0) / (b - a);
      mass_[c] += falling;
      mass_[c + 1] += rising;
    }
    // u_delta - u_mu_h at the nodes, mu_h = sum_j m_j (delta_{x_j} + delta_{-x_j}).
    for (std::size_t i = 0; i <= n; ++i) {
      double u = 0.0;
      for (std::size_t j = 0; j <= n; ++j) {
        u -= (std::abs(nodes_[i] - nodes_[j]) + nodes_[i] + nodes_[j]) * mass_[j];
      }
      lhs_[i] = dirac_potential(nodes_[i]) - u;
    }
  }

  double node(std::size_t i) const { return nodes_[i]; }
  double weight(std::size_t j) const { return mass_[j]; }

  double residual(std::size_t i, double ri, const std::vector<double>& r) const {
    const double xi = nodes_[i];
    double sum = 0.0;
    for (std::size_t j = i + 1; j <= n_; ++j) {
      const double dt = std::max(ri - r[j], 0.0);
      if (dt == 0.0) continue;
      sum += (expected_local_time(dt, xi - nodes_[j]) + expected_local_time(dt, xi + nodes_[j])) * mass_[j];
    }
    return expected_local_time(std::max(ri, 0.0), xi) - sum - lhs_[i];
  }

 private:
  std::size_t n_;
  std::vector<double> nodes_;
  std::vector<double> mass_;
  std::vector<double> lhs_;
};

}  // namespace detail

/// Solves the monotone symmetric integral equation for the barrier of mu on
/// the grid x_i = i k/n, recursively from r_n = 0 down to r_0. Each r_i is
/// the first zero above r_{i+1} (bracket doubled outwards, capped at 4k^2),
/// refined by bisection to absolute width tol.
///
/// Near a zero of the density at the origin the discrete equation loses
/// resolution: the leading terms cancel and the residual flattens out at the
/// level of the quadrature error, with either sign. Nodes there are handled
/// as follows.
///  - A root slightly below r_{i+1} (residual at r_{i+1} at most
///    kMonotoneResidualSlack k) is projected onto r_{i+1}.
///  - x = 0 with f(0) = 0, or a node inside the central kContinuationMass of
///    mu whose bracket fails, ends the recursion: r on [0, x_i] is taken
///    from the even quadratic A - B x^2 through the two nodes above, and
///    meta().extrapolated_nodes counts the nodes filled in this way.
/// Anywhere else a failed bracket is an error naming the node, as is a
/// density that vanishes on a whole grid cell at the origin.
inline constexpr double kMonotoneResidualSlack = 1e-6;
inline constexpr double kContinuationMass = 0.01;

inline BarrierTable solve_barrier(const SymmetricMeasure& mu, std::size_t n, double tol = 1e-12) {
  if (n < 2) throw ConfigError("solve_barrier: n must be at least 2");
  if (!(tol > 0.0)) throw ConfigError("solve_barrier: tol must be positive");
  const detail::DiscreteBarrierSystem system(mu, n);
  const double r_max = 4.0 * mu.k() * mu.k();

  SolverMeta meta;
  meta.tol = tol;
  meta.measure = mu.descriptor();

  std::vector<double> r(n + 1, 0.0);
  auto near_origin = [&](std::size_t i) {
    return i + 2 <= n && 2.0 * mu.mass_from_zero(system.node(i)) <= kContinuationMass;
  };
  auto continue_to_origin = [&](std::size_t i) {
    // a gap in the support around 0 has an unbounded barrier
    if (mu.density(system.node(1)) == 0.0) {
      throw NumericalError("solve_barrier: density vanishes on [0, " + std::to_string(system.node(1)) +
                           "]; the barrier is unbounded there");
    }
    const double x1 = system.node(i + 1);
    const double x2 = system.node(i + 2);
    const double b = std::max((r[i + 1] - r[i + 2]) / (x2 * x2 - x1 * x1), 0.0);
    for (std::size_t j = 0; j <= i; ++j) r[j] = r[i + 1] + b * (x1 * x1 - system.node(j) * system.node(j));
    meta.extrapolated_nodes = i + 1;
  };

  for (std::size_t step = 0; step < n; ++step) {
    const std::size_t i = n - 1 - step;
    if (i == 0 && mu.density(0.0) == 0.0) {
      continue_to_origin(0);
      break;
    }
    double lo = r[i + 1];
    const double f_lo = system.residual(i, lo, r);
    if (f_lo > 0.0) {
      // root lies below r_{i+1}
      if (f_lo <= kMonotoneResidualSlack * mu.k()) {
        r[i] = lo;
        ++meta.monotone_projected;
        continue;
      }
      if (near_origin(i)) {
        continue_to_origin(i);
        break;
      }
      throw InvariantViolation("solve_barrier: monotonicity violated at node " + std::to_string(i) +
                               " (residual " + std::to_string(f_lo) + " at r_{i+1})");
    }
    // Near a zero of f the residual is flat and may cross zero more than
    // once; grow the bracket geometrically from r_{i+1} so that bisection
    // lands on the first crossing, the one continuous in x.
    std::size_t iterations = 0;
    double hi = lo;
    for (double step = 1e-9 * r_max;; step *= 2.0) {
      hi = std::min(lo + step, r_max);
      ++iterations;
      if (system.residual(i, hi, r) > 0.0) break;
      if (hi == r_max) break;
      lo = hi;
    }
    if (!(system.residual(i, hi, r) > 0.0)) {
      if (near_origin(i)) {
        continue_to_origin(i);
        break;
      }
      throw NumericalError("solve_barrier: no sign change in [r_{i+1}, 4k^2] at node " + std::to_string(i));
    }
    while (hi - lo > tol && iterations < 200) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (system.residual(i, mid, r) > 0.0) {
        hi = mid;
      } else {
        lo = mid;
      }
      ++iterations;
    }
    r[i] = 0.5 * (lo + hi);
    meta.total_iterations += iterations;
    meta.max_node_iterations = std::max(meta.max_node_iterations, iterations);
  }
  return BarrierTable::from_values(mu.k(), std::move(r), std::move(meta));
}

struct ResidualReport {
  double max_abs_residual = 0.0;
  std::vector<double> residuals;  // per node, same discrete system as solve_barrier
};

/// Left-minus-right of the discretized equation at every node of the table,
/// evaluated with the table's own values. Node n is the boundary condition
/// r_n = 0 and reports the residual of that equation as well.
inline ResidualReport residuals(const BarrierTable& table, const SymmetricMeasure& mu) {
  if (std::abs(table.k() - mu.k()) > 1e-12 * mu.k()) {
    throw ConfigError("residuals: table and measure have different support");
  }
  const detail::DiscreteBarrierSystem system(mu, table.n());
  ResidualReport report;
  report.residuals.resize(table.n() + 1);
  for (std::size_t i = 0; i <= table.n(); ++i) {
    report.residuals[i] = system.residual(i, table.values()[i], table.values());
    report.max_abs_residual = std::max(report.max_abs_residual, std::abs(report.residuals[i]));
  }
  return report;
}

struct GrowthBoundReport {
  bool passed = true;
  double worst_slack = std::numeric_limits<double>::infinity();
  std::size_t pairs_checked = 0;
};

/// Right-hand side minus left-hand side of
///   r(x) <= r(y) + (32 y^2 / pi^2) (ln(4/pi) + |ln(mu[0,x] / mu[0,y])|),  0 < x <= y.
inline double growth_bound_slack(const BarrierTable& table, const SymmetricMeasure& mu, double x, double y) {
  const double ratio = mu.mass_from_zero(x) / mu.mass_from_zero(y);
  const double rhs = table(y) + 32.0 * y * y / (std::numbers::pi * std::numbers::pi) *
                                    (std::log(4.0 / std::numbers::pi) + std::abs(std::log(ratio)));
  return rhs - table(x);
}

/// Checks the growth bound on the pairs (x, y) = (eta^(l+1) k, eta^l k) for
/// every l with eta^(l+1) k at least one grid step.
inline GrowthBoundReport check_growth_bound(const BarrierTable& table, const SymmetricMeasure& mu, double eta) {
  if (!(eta > 0.0 && eta < 1.0)) throw ConfigError("growth bound: eta must lie in (0,1)");
  GrowthBoundReport report;
  double y = mu.k();
  while (eta * y >= table.h()) {
    const double slack = growth_bound_slack(table, mu, eta * y, y);
    report.worst_slack = std::min(report.worst_slack, slack);
    report.passed = report.passed && slack >= 0.0;
    ++report.pairs_checked;
    y *= eta;
  }
  return report;
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Metadata object written as the first line of a barrier file.
inline nlohmann::json barrier_metadata(const BarrierTable& table) {
  return {{"measure", table.meta().measure},
          {"n", table.n()},
          {"tol", table.meta().tol},
          {"extrapolated_nodes", table.meta().extrapolated_nodes},
          {"monotone_projected", table.meta().monotone_projected},
          {"solver_version", kVersion}};
}

/// "# {json}" metadata line, an "x,r" header, then one row per node with 17
/// significant digits.
inline void write_barrier_csv(std::ostream& out, const BarrierTable& table, const nlohmann::json& meta) {
  out << "# " << meta.dump() << "\n";
  out << "x,r\n";
  for (std::size_t i = 0; i <= table.n(); ++i) {
    out << format_double(table.x(i)) << "," << format_double(table.values()[i]) << "\n";
  }
}

inline BarrierTable read_barrier_csv(std::istream& in) {
  std::string line;
  nlohmann::json meta;
  bool header = false;
  std::vector<double> xs;
  std::vector<double> rs;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (meta.is_null()) {
        try {
          meta = nlohmann::json::parse(line.substr(1));
        } catch (const nlohmann::json::exception&) {
          // free-form comment
        }
      }
      continue;
    }
    if (!header) {
      if (line != "x,r") throw ConfigError("barrier file: expected header 'x,r', got '" + line + "'");
      header = true;
      continue;
    }
    std::istringstream row(line);
    double x = 0.0;
    double r = 0.0;
    char comma = 0;
    if (!(row >> x >> comma >> r) || comma != ',') {
      throw ConfigError("barrier file: malformed row at line " + std::to_string(line_no));
    }
    xs.push_back(x);
    rs.push_back(r);
  }
  if (xs.size() < 2) throw ConfigError("barrier file: fewer than two rows");
  const double k = xs.back();
  const double h = k / static_cast<double>(xs.size() - 1);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (std::abs(xs[i] - static_cast<double>(i) * h) > 1e-9 * std::max(1.0, k)) {
      throw ConfigError("barrier file: x column is not a uniform grid starting at 0");
    }
  }
  SolverMeta sm;
  if (meta.is_object()) {
    sm.tol = meta.value("tol", 0.0);
    sm.extrapolated_nodes = meta.value("extrapolated_nodes", std::size_t{0});
    sm.monotone_projected = meta.value("monotone_projected", std::size_t{0});
    if (meta.contains("measure")) sm.measure = meta["measure"];
  }
  return BarrierTable::from_values(k, std::move(rs), std::move(sm));
}

inline BarrierTable load_barrier(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open barrier file '" + path + "'");
  return read_barrier_csv(in);
}

}  // namespace rootbarrier
