#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "rootbarrier/barrier.hpp"
#include "rootbarrier/errors.hpp"
#include "rootbarrier/rng.hpp"

namespace rootbarrier {

/// One time-space increment of Brownian motion at the exit of the
/// eps-scaled Root barrier of U[-1,1]: dt = eps^2 r(u), dx = eps u.
struct IncrementSample {
  double dt = 0.0;
  double dx = 0.0;
  double u = 0.0;
};

struct PathPoint {
  double tau = 0.0;
  double x = 0.0;
};

inline void require_unit_uniform_table(const BarrierTable& table) {
  if (std::abs(table.k() - 1.0) > 1e-12) {
    throw ConfigError("increment sampling needs the barrier of U[-1,1] (table has k != 1)");
  }
  const auto& m = table.meta().measure;
  if (m.is_object() && !(m.value("family", "") == "power" && m.value("alpha", 0.0) == 1.0)) {
    throw ConfigError("increment sampling needs the barrier of U[-1,1] (table was solved for " +
                      m.dump() + ")");
  }
}

/// Increment for a pre-drawn u in [-1,1].
inline IncrementSample increment_from_uniform(const BarrierTable& table, double eps, double u) {
  return {eps * eps * table(u), eps * u, u};
}

inline IncrementSample sample_increment(const BarrierTable& table, double eps, RngStream& stream) {
  if (!(eps > 0.0)) throw ConfigError("sample_increment: eps must be positive");
  return increment_from_uniform(table, eps, stream.uniform_symmetric());
}

/// Cumulative (tau_k, X_k), k = 0..n_steps, starting from (0, 0).
inline std::vector<PathPoint> sample_path(const BarrierTable& table, double eps, RngStream& stream,
                                          std::size_t n_steps) {
  std::vector<PathPoint> path;
  path.reserve(n_steps + 1);
  path.push_back({0.0, 0.0});
  for (std::size_t k = 0; k < n_steps; ++k) {
    const IncrementSample inc = sample_increment(table, eps, stream);
    path.push_back({path.back().tau + inc.dt, path.back().x + inc.dx});
  }
  return path;
}

}  // namespace rootbarrier
