#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "sps/basis.hpp"
#include "sps/energy.hpp"
#include "sps/error.hpp"
#include "sps/flow.hpp"

using namespace sps;

namespace {

WkBasis basis_k2() { return build_basis(2, 3.5, build_uniform(5.0, 1001)); }

}  // namespace

TEST_CASE("zero is a fixed point and the step is odd") {
  const GridPtr g = build_uniform(5.0, 512);
  CHECK(step(RadialField::zeros(g), 3.5, 1e-2).sup_norm() == 0.0);
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 5; ++trial) {
    const RadialField u = testing::random_field(g, rng, 3.0);
    CHECK(testing::max_abs_diff(step(-u, 3.5, 1e-3), -step(u, 3.5, 1e-3)) == 0.0);
  }
  CHECK_THROWS_AS(step(RadialField::zeros(g), 3.5, 0.0), ConfigError);
}

TEST_CASE("config validation") {
  FlowConfig c;
  CHECK_NOTHROW(c.validate());
  c.energy_floor = 1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = FlowConfig{};
  c.dt = -1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("small data decay, large data blow up") {
  const WkBasis b = basis_k2();
  FlowConfig cfg;
  const FlowTrajectory small = integrate(1e-3 * b.bumps[0], 3.5, cfg);
  CHECK(small.verdict == Verdict::DecaysToZero);
  const std::vector<double> d = {40.0, -40.0};
  const FlowTrajectory large = integrate(combine(b, d), 3.5, cfg);
  CHECK(large.verdict == Verdict::BlowsUp);
}

TEST_CASE("integrate is odd") {
  const WkBasis b = basis_k2();
  const std::vector<double> d = {3.0, -2.0};
  FlowConfig cfg;
  cfg.t_max = 2.0;
  const RadialField u0 = combine(b, d);
  const FlowTrajectory a = integrate(u0, 3.5, cfg);
  const FlowTrajectory m = integrate(-u0, 3.5, cfg);
  CHECK(a.verdict == m.verdict);
  REQUIRE(a.steps.size() == m.steps.size());
  CHECK(testing::max_abs_diff(a.final_state, -m.final_state) == 0.0);
}

TEST_CASE("energy dissipation on random trajectories") {
  const GridPtr g = build_uniform(5.0, 512);
  std::mt19937_64 rng(99);
  FlowConfig cfg;
  cfg.t_max = 20.0;
  for (int trial = 0; trial < 3; ++trial) {
    const FlowTrajectory tr = integrate(testing::random_field(g, rng, 4.0), 3.5, cfg);
    CHECK(tr.energy_monotonicity_violation() == -1);
    CHECK(tr.nodal_monotonicity_violation() == -1);
    for (const StepRecord& s : tr.steps) {
      const double work = s.dt * s.ut_norm * s.ut_norm;
      const double scale = 1e-12 * (1.0 + std::abs(s.energy));
      CHECK(s.energy <= s.energy_before + 1e-10);
      if (work > scale) CHECK(std::abs(s.energy - s.energy_before + work) <= 0.2 * work);
    }
  }
}
