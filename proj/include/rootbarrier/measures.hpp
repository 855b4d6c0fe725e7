#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"
#include "rootbarrier/errors.hpp"

namespace rootbarrier {

namespace detail {

// mu_{k,alpha}([-x,x]) = (x/k)^alpha.
struct PowerLaw {
  double alpha;
};

// Piecewise-linear density on a uniform grid of [0,k], extended evenly.
struct TabulatedDensity {
  std::vector<double> values;  // f at i*k/(m-1), already normalized
};

// int_lo^hi (a - x) (c0 + s a) da
inline double moment_linear(double lo, double hi, double x, double c0, double s) {
  auto antiderivative = [&](double a) {
    return s * a * a * a / 3.0 + (c0 - s * x) * a * a / 2.0 - c0 * x * a;
  };
  return antiderivative(hi) - antiderivative(lo);
}

}  // namespace detail

/// Zero-mean law on [-k,k] with an even density that is nondecreasing in |x|.
/// Immutable once built; use make_power_measure / make_table_measure.
class SymmetricMeasure {
 public:
  double k() const { return k_; }

  /// Density f(x); zero outside [-k,k].
  double density(double x) const {
    const double a = std::abs(x);
    if (a > k_) return 0.0;
    return std::visit([&](const auto& law) { return density_abs(law, a); }, law_);
  }

  /// mu([0,x]) for x >= 0, i.e. half of mu([-x,x]).
  double mass_from_zero(double x) const {
    if (x <= 0.0) return 0.0;
    if (x >= k_) return 0.5;
    return std::visit([&](const auto& law) { return half_mass(law, x); }, law_);
  }

  /// int_0^x y f(y) dy for x >= 0.
  double first_moment_from_zero(double x) const {
    if (x <= 0.0) return 0.0;
    x = std::min(x, k_);
    return std::visit([&](const auto& law) { return half_moment(law, x); }, law_);
  }

  /// Distribution function of the measure.
  double cdf(double x) const {
    if (x >= 0.0) return 0.5 + mass_from_zero(x);
    return 0.5 - mass_from_zero(-x);
  }

  /// u_mu(x) = -int |x - y| mu(dy). Evaluated through |x|, so exactly even.
  double potential(double x) const {
    const double a = std::abs(x);
    if (a >= k_) return -a;
    // For a symmetric law and a >= 0: E|Y - a| = a + E(|Y| - a)^+.
    return -a - std::visit([&](const auto& law) { return upper_excess(law, a); }, law_);
  }

  nlohmann::json descriptor() const {
    return std::visit(
        [&](const auto& law) -> nlohmann::json {
          using T = std::decay_t<decltype(law)>;
          if constexpr (std::is_same_v<T, detail::PowerLaw>) {
            return {{"family", "power"}, {"k", k_}, {"alpha", law.alpha}};
          } else {
            return {{"family", "table"}, {"k", k_}, {"density", law.values}};
          }
        },
        law_);
  }

  bool is_uniform() const {
    const auto* p = std::get_if<detail::PowerLaw>(&law_);
    return p != nullptr && p->alpha == 1.0;
  }

 private:
  SymmetricMeasure(double k, std::variant<detail::PowerLaw, detail::TabulatedDensity> law)
      : k_(k), law_(std::move(law)) {}

  friend SymmetricMeasure make_power_measure(double k, double alpha);
  friend SymmetricMeasure make_table_measure(double k, std::vector<double> density);

  double density_abs(const detail::PowerLaw& law, double a) const {
    if (law.alpha == 1.0) return 0.5 / k_;
    return law.alpha * std::pow(a, law.alpha - 1.0) / (2.0 * std::pow(k_, law.alpha));
  }
  double density_abs(const detail::TabulatedDensity& law, double a) const {
    const auto [cell, w] = locate(law, a);
    return (1.0 - w) * law.values[cell] + w * law.values[cell + 1];
  }

  double half_mass(const detail::PowerLaw& law, double x) const {
    return 0.5 * std::pow(x / k_, law.alpha);
  }
  double half_mass(const detail::TabulatedDensity& law, double x) const {
    const double step = k_ / static_cast<double>(law.values.size() - 1);
    const auto [cell, w] = locate(law, x);
    double mass = 0.0;
    for (std::size_t i = 0; i < cell; ++i) mass += 0.5 * step * (law.values[i] + law.values[i + 1]);
    const double f_at_x = (1.0 - w) * law.values[cell] + w * law.values[cell + 1];
    mass += 0.5 * (w * step) * (law.values[cell] + f_at_x);
    return mass;
  }

  double half_moment(const detail::PowerLaw& law, double x) const {
    return law.alpha * std::pow(x / k_, law.alpha) * x / (2.0 * (law.alpha + 1.0));
  }
  double half_moment(const detail::TabulatedDensity& law, double x) const {
    const std::size_t cells = law.values.size() - 1;
    const double step = k_ / static_cast<double>(cells);
    double total = 0.0;
    for (std::size_t i = 0; i < cells; ++i) {
      const double lo = static_cast<double>(i) * step;
      if (lo >= x) break;
      const double hi = std::min(i + 1 == cells ? k_ : static_cast<double>(i + 1) * step, x);
      const double slope = (law.values[i + 1] - law.values[i]) / step;
      const double c0 = law.values[i] - slope * lo;
      // int y (c0 + slope y) dy
      total += c0 * (hi * hi - lo * lo) / 2.0 + slope * (hi * hi * hi - lo * lo * lo) / 3.0;
    }
    return total;
  }

  // E(|Y| - a)^+ where |Y| has density 2f on [0,k].
  double upper_excess(const detail::PowerLaw& law, double a) const {
    // int_a^k (1 - (s/k)^alpha) ds
    return (k_ - a) - (std::pow(k_, law.alpha + 1.0) - std::pow(a, law.alpha + 1.0)) /
                          ((law.alpha + 1.0) * std::pow(k_, law.alpha));
  }
  double upper_excess(const detail::TabulatedDensity& law, double a) const {
    const std::size_t cells = law.values.size() - 1;
    const double step = k_ / static_cast<double>(cells);
    double total = 0.0;
    for (std::size_t i = 0; i < cells; ++i) {
      const double lo = static_cast<double>(i) * step;
      const double hi = i + 1 == cells ? k_ : static_cast<double>(i + 1) * step;
      if (hi <= a) continue;
      const double slope = (law.values[i + 1] - law.values[i]) / step;
      const double c0 = law.values[i] - slope * lo;
      total += 2.0 * detail::moment_linear(std::max(lo, a), hi, a, c0, slope);
    }
    return total;
  }

  std::pair<std::size_t, double> locate(const detail::TabulatedDensity& law, double a) const {
    const std::size_t cells = law.values.size() - 1;
    const double pos = std::clamp(a / k_, 0.0, 1.0) * static_cast<double>(cells);
    const std::size_t cell = std::min(static_cast<std::size_t>(pos), cells - 1);
    return {cell, pos - static_cast<double>(cell)};
  }

  double k_;
  std::variant<detail::PowerLaw, detail::TabulatedDensity> law_;
};

/// The family mu_{k,alpha}([-x,x]) = (x/k)^alpha, density alpha x^(alpha-1) / (2 k^alpha).
/// alpha = 1 is the uniform law on [-k,k].
inline SymmetricMeasure make_power_measure(double k, double alpha) {
  if (!(k > 0.0) || !std::isfinite(k)) throw ConfigError("power measure: k must be positive");
  if (!(alpha >= 1.0) || !std::isfinite(alpha)) {
    throw ConfigError(
        "power measure: alpha must be >= 1 (density has to be bounded and nondecreasing on "
        "[0,k])");
  }
  return SymmetricMeasure(k, detail::PowerLaw{alpha});
}

/// Density sampled at m >= 2 equally spaced points of [0,k], linear in
/// between and mirrored to [-k,0]. Samples are rescaled to unit total mass.
inline SymmetricMeasure make_table_measure(double k, std::vector<double> density) {
  if (!(k > 0.0) || !std::isfinite(k)) throw ConfigError("table measure: k must be positive");
  if (density.size() < 2) throw ConfigError("table measure: need at least 2 density samples");
  for (std::size_t i = 0; i < density.size(); ++i) {
    if (!(density[i] >= 0.0) || !std::isfinite(density[i])) {
      throw ConfigError("table measure: density sample " + std::to_string(i) +
                        " is negative or not finite");
    }
    if (i > 0 && density[i] < density[i - 1] - 1e-12) {
      throw ConfigError("table measure: density decreases at sample " + std::to_string(i) +
                        "; it must be nondecreasing on [0,k]");
    }
  }
  const double step = k / static_cast<double>(density.size() - 1);
  double half = 0.0;
  for (std::size_t i = 0; i + 1 < density.size(); ++i) half += 0.5 * step * (density[i] + density[i + 1]);
  if (!(half > 0.0)) throw ConfigError("table measure: density has zero mass");
  for (double& v : density) v /= 2.0 * half;
  return SymmetricMeasure(k, detail::TabulatedDensity{std::move(density)});
}

inline double potential(const SymmetricMeasure& mu, double x) { return mu.potential(x); }

/// Potential of the point mass at the origin.
inline double dirac_potential(double x) { return -std::abs(x); }

/// {"family":"power","k":..,"alpha":..} or {"family":"table","k":..,"density":[..]}
inline SymmetricMeasure measure_from_json(const nlohmann::json& j) {
  try {
    const std::string family = j.at("family").get<std::string>();
    const double k = j.at("k").get<double>();
    if (family == "power") return make_power_measure(k, j.at("alpha").get<double>());
    if (family == "table") return make_table_measure(k, j.at("density").get<std::vector<double>>());
    throw ConfigError("unknown measure family '" + family + "'");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("measure spec: ") + e.what());
  }
}

struct FiniteBarrierCheck {
  bool converged = false;
  double partial_sum = 0.0;
  double last_term = 0.0;
  int terms = 0;
  std::string diagnostic;
};

/// Truncated test of sum_l eta^(2l) |ln mu([0, eta^(l+1) k])| < infinity.
///
/// Only a heuristic: it sums l = 0..200 and declares convergence when the
/// final term is below 1e-8. A measure with no mass on some [0, eta^(l+1) k]
/// fails outright.
inline FiniteBarrierCheck check_finite_barrier_condition(const SymmetricMeasure& mu, double eta) {
  if (!(eta > 0.0 && eta < 1.0)) throw ConfigError("finite barrier check: eta must lie in (0,1)");
  constexpr int kMaxTerm = 200;
  FiniteBarrierCheck out;
  double eta_pow = 1.0;  // eta^l
  for (int l = 0; l <= kMaxTerm; ++l) {
    const double mass = mu.mass_from_zero(eta_pow * eta * mu.k());
    if (!(mass > 0.0)) {
      out.converged = false;
      out.terms = l;
      out.diagnostic = "mu([0, eta^" + std::to_string(l + 1) + " k]) = 0; series diverges";
      return out;
    }
    out.last_term = eta_pow * eta_pow * std::abs(std::log(mass));
    out.partial_sum += out.last_term;
    out.terms = l + 1;
    eta_pow *= eta;
  }
  out.converged = out.last_term < 1e-8;
  out.diagnostic = out.converged ? "heuristic: partial sums stabilized by l = 200"
                                 : "heuristic: tail term still >= 1e-8 at l = 200";
  return out;
}

}  // namespace rootbarrier
