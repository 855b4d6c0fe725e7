#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "rootbarrier/walk_on_roots.hpp"

using namespace rootbarrier;

namespace {

const BarrierTable& unit_table() {
  static const BarrierTable t = solve_barrier(make_power_measure(1.0, 1.0), 500);
  return t;
}

ParabolicDomain strip(double lo, double hi, double T) {
  ParabolicDomain d;
  d.T = T;
  d.lower = [lo](double) { return lo; };
  d.upper = [hi](double) { return hi; };
  d.boundary_data = [](double, double x) { return x; };
  return d;
}

}  // namespace

TEST(ParabolicDistance, Examples) {
  const auto dom = quartic_domain();
  EXPECT_DOUBLE_EQ(parabolic_distance(dom, 0.0, 1.0), 1.0);
  EXPECT_EQ(parabolic_distance(dom, 0.5, 1.5), 0.0);
  EXPECT_EQ(parabolic_distance(dom, 1.0, 0.5), 0.0);
  EXPECT_DOUBLE_EQ(parabolic_distance(dom, 0.75, 0.9), 0.35);
  EXPECT_THROW(parabolic_distance(dom, 0.5, 1.6), std::domain_error);
  EXPECT_THROW(parabolic_distance(dom, 1.2, 0.5), std::domain_error);
  EXPECT_THROW(parabolic_distance(dom, 0.0, -0.1), std::domain_error);
}

TEST(SafeRadius, Examples) {
  EXPECT_DOUBLE_EQ(quartic_wedge_rho(quartic_domain(), 0.0, 1.0), 1.0 / std::numbers::sqrt2);
  const auto flat = strip(-1.0, 3.0, 10.0);
  EXPECT_DOUBLE_EQ(default_rho(flat, 0.0, 1.0), 2.0);
  EXPECT_DOUBLE_EQ(default_rho(flat, 9.0, 1.0), 1.0);
  const auto dom = quartic_domain();
  EXPECT_DOUBLE_EQ(default_rho(dom, 0.0, 1.0), 0.5);
  for (double t : {0.0, 0.3, 0.9, 0.99}) {
    for (double f : {0.05, 0.3, 0.5, 0.8, 0.97}) {
      const double x = f * (2.0 - t);
      EXPECT_LE(default_rho(dom, t, x), parabolic_distance(dom, t, x));
      EXPECT_LE(quartic_wedge_rho(dom, t, x), parabolic_distance(dom, t, x));
      EXPECT_GT(default_rho(dom, t, x), 0.0);
    }
  }
}

TEST(WalkChain, StartInsideShellTakesNoSteps) {
  RngStream s(1, 0);
  const auto r = walk_chain(quartic_domain(), unit_table(), 0.0, 0.004, 0.005, s);
  EXPECT_EQ(r.steps, 0u);
  EXPECT_EQ(r.tau, 0.0);
  EXPECT_EQ(r.m, 0.004);
  EXPECT_THROW(walk_chain(quartic_domain(), unit_table(), 0.0, 1.0, 0.0, s), ConfigError);
}

TEST(WalkChain, StepBoundsContainmentAndMonotoneTime) {
  const auto dom = quartic_domain();
  const double r0 = unit_table().r0();
  for (std::uint32_t i = 0; i < 300; ++i) {
    RngStream s = RngStream(4, 0).substream(i);
    double t = 0.0, x = 1.0;
    // replay the chain step by step with the same stream
    RngStream replay = s;
    const auto end = walk_chain(dom, unit_table(), t, x, 0.002, s);
    for (std::size_t k = 0; k < end.steps; ++k) {
      const double rho = default_rho(dom, t, x);
      const auto inc = sample_increment(unit_table(), rho, replay);
      ASSERT_LE(inc.dt, rho * rho * r0 + 1e-15);
      ASSERT_LE(std::abs(inc.dx), rho);
      ASSERT_GE(inc.dt, 0.0);
      t += inc.dt;
      x += inc.dx;
      ASSERT_LE(t, dom.T + 1e-12);
      ASSERT_GE(x, dom.lower(t) - 1e-12);
      ASSERT_LE(x, dom.upper(t) + 1e-12);
    }
    EXPECT_EQ(t, end.tau);
    EXPECT_EQ(x, end.m);
    EXPECT_LE(parabolic_distance(dom, end.tau, end.m), 0.002);
  }
}

TEST(WalkChain, OversizedRadiusIsCaught) {
  auto dom = quartic_domain();
  dom.rho = [](const ParabolicDomain& d, double t, double x) { return 4.0 * parabolic_distance(d, t, x); };
  RngStream s(2, 0);
  auto run = [&] {
    for (int i = 0; i < 100; ++i) walk_chain(dom, unit_table(), 0.0, 1.0, 0.001, s);
  };
  EXPECT_THROW(run(), InvariantViolation);
}

TEST(ProjectToBoundary, Cases) {
  const auto dom = quartic_domain();
  const auto term = project_to_boundary(dom, 0.99999, 0.8);
  EXPECT_EQ(term.first, 1.0);
  EXPECT_EQ(term.second, 0.8);
  const auto up = project_to_boundary(dom, 0.2, 1.8 - 0.0025);
  EXPECT_EQ(up.first, 0.2);
  EXPECT_DOUBLE_EQ(up.second, 1.8);
  const auto low = project_to_boundary(dom, 0.3, 0.001);
  EXPECT_EQ(low.second, 0.0);
  const auto tie = project_to_boundary(strip(0.0, 2.0, 100.0), 0.0, 1.0);
  EXPECT_EQ(tie.first, 0.0);
  EXPECT_EQ(tie.second, 0.0);
}

TEST(SolvePde, ConstantDataIsExact) {
  auto dom = quartic_domain();
  dom.boundary_data = [](double, double) { return 2.5; };
  const auto st = solve_pde(dom, unit_table(), 0.0, 1.0, 0.01, 1000, RngStream(1, 0));
  EXPECT_EQ(st.estimate, 2.5);
  EXPECT_EQ(st.std_error, 0.0);
  EXPECT_EQ(st.samples, 1000u);
  EXPECT_EQ(st.delta, 0.01);
  EXPECT_GT(st.mean_steps, 1.0);
}

TEST(SolvePde, SpaceCoordinateIsMartingale) {
  auto dom = quartic_domain();
  dom.boundary_data = [](double, double x) { return x; };
  const double delta = 0.005;
  for (double x0 : {0.4, 1.0, 1.5}) {
    const auto st = solve_pde(dom, unit_table(), 0.0, x0, delta, 20000, RngStream(6, 1));
    EXPECT_NEAR(st.estimate, x0, 3.0 * st.std_error + 5.0 * delta) << x0;
  }
}

TEST(SolvePde, QuarticSolutionAtOneSeed) {
  const auto st = solve_pde(quartic_domain(), unit_table(), 0.0, 1.0, 0.005, 10000, RngStream(1, 0));
  EXPECT_NEAR(st.estimate, 40.0, 3.0 * st.std_error + 5.0 * 0.005);
  EXPECT_DOUBLE_EQ(quartic_solution(0.0, 1.0), 40.0);
}

TEST(SolvePde, IndependentOfWorkerCount) {
  const auto one = solve_pde(quartic_domain(), unit_table(), 0.0, 1.0, 0.01, 500, RngStream(3, 0), 1);
  const auto four = solve_pde(quartic_domain(), unit_table(), 0.0, 1.0, 0.01, 500, RngStream(3, 0), 4);
  EXPECT_EQ(one.estimate, four.estimate);
  EXPECT_EQ(one.std_error, four.std_error);
  EXPECT_EQ(one.mean_steps, four.mean_steps);
}

TEST(SolvePde, RejectsBadInputs) {
  EXPECT_THROW(solve_pde(quartic_domain(), unit_table(), 0.0, 1.0, 0.01, 0, RngStream(1, 0)), ConfigError);
  const auto wide = solve_barrier(make_power_measure(2.0, 1.0), 50);
  EXPECT_THROW(solve_pde(quartic_domain(), wide, 0.0, 1.0, 0.01, 10, RngStream(1, 0)), ConfigError);
  auto nodata = quartic_domain();
  nodata.boundary_data = nullptr;
  EXPECT_THROW(solve_pde(nodata, unit_table(), 0.0, 1.0, 0.01, 10, RngStream(1, 0)), ConfigError);
}

TEST(DomainConfig, ParsesQuarticProblem) {
  const auto j = nlohmann::json::parse(R"({"T":1,"lower":{"kind":"affine","a":0,"b":0},
      "upper":{"kind":"affine","a":2,"b":-1},"boundary_data":{"kind":"quartic"},"rho":"quartic-wedge"})");
  const auto dom = domain_from_json(j);
  EXPECT_EQ(dom.upper(0.25), 1.75);
  EXPECT_EQ(dom.lipschitz_upper, 1.0);
  EXPECT_EQ(dom.boundary_data(0.0, 1.0), 40.0);
  EXPECT_DOUBLE_EQ(safe_radius(dom, 0.0, 1.0), 1.0 / std::numbers::sqrt2);
}

TEST(DomainConfig, SamplesCurveAndTableData) {
  const auto j = nlohmann::json::parse(R"({"T":2,
      "lower":{"kind":"samples","t":[0,1,2],"x":[0,0.5,0.5]},
      "upper":{"kind":"affine","a":3,"b":0},
      "boundary_data":{"kind":"expression-table","t":[0,2],"x":[0,3],"values":[[0,3],[2,5]]}})");
  const auto dom = domain_from_json(j);
  EXPECT_DOUBLE_EQ(dom.lower(0.5), 0.25);
  EXPECT_DOUBLE_EQ(dom.lower(1.7), 0.5);
  EXPECT_DOUBLE_EQ(dom.lipschitz_lower, 0.5);
  EXPECT_DOUBLE_EQ(dom.boundary_data(1.0, 1.5), 2.5);  // bilinear t + x
  EXPECT_DOUBLE_EQ(dom.boundary_data(5.0, -1.0), 2.0);  // clamped
  EXPECT_FALSE(dom.rho);
}

TEST(DomainConfig, Errors) {
  auto bad = [](const char* text) { return domain_from_json(nlohmann::json::parse(text)); };
  EXPECT_THROW(bad(R"({"T":1,"lower":{"kind":"affine","a":0,"b":0},"upper":{"kind":"affine","a":2,"b":-1}})"),
               ConfigError);
  EXPECT_THROW(bad(R"({"T":1,"lower":{"kind":"affine","a":2,"b":0},"upper":{"kind":"affine","a":1,"b":0},
      "boundary_data":{"kind":"quartic"}})"),
               ConfigError);
  EXPECT_THROW(bad(R"({"T":1,"lower":{"kind":"spline"},"upper":{"kind":"affine","a":1,"b":0},
      "boundary_data":{"kind":"quartic"}})"),
               ConfigError);
  EXPECT_THROW(bad(R"({"T":1,"lower":{"kind":"affine","a":0,"b":0},"upper":{"kind":"affine","a":1,"b":0},
      "boundary_data":{"kind":"quartic"},"rho":"tight"})"),
               ConfigError);
  EXPECT_THROW(bad(R"({"T":-1,"lower":{"kind":"affine","a":0,"b":0},"upper":{"kind":"affine","a":1,"b":0},
      "boundary_data":{"kind":"quartic"}})"),
               ConfigError);
}
