#include <doctest.h>

#include <cmath>

#include "sps/basis.hpp"
#include "sps/energy.hpp"
#include "sps/error.hpp"

using namespace sps;

TEST_CASE("supports, positivity and Nehari normalization") {
  for (int k : {2, 3}) {
    for (double q : {3.5, 4.0}) {
      const GridPtr g = build_uniform(1.0, 401);
      const WkBasis b = build_basis(k, q, g);
      REQUIRE(static_cast<int>(b.bumps.size()) == k);
      for (int i = 0; i < k; ++i) {
        const RadialField& w = b.bumps[i];
        const double lo = static_cast<double>(i) / k;
        const double hi = static_cast<double>(i + 1) / k;
        for (int j = 0; j < g->size(); ++j) {
          const double r = g->node(j);
          if (r < lo || r > hi) CHECK(w[j] == 0.0);
          CHECK(w[j] >= 0.0);
        }
        const double h1 = h1_norm_sq(w);
        CHECK(std::abs(h1 - lp_integral(w, q + 1.0)) <= 1e-8 * h1);
        CHECK(b.norms_sq[i] == doctest::Approx(h1));
      }
      // Pairwise disjoint supports.
      for (int j = 0; j < g->size(); ++j) {
        int positive = 0;
        for (const auto& w : b.bumps) positive += w[j] > 0.0;
        CHECK(positive <= 1);
      }
      CHECK(b.m_max >= b.m_min);
      CHECK(b.m_min > 0.0);
      CHECK(b.bumps[0][0] > 0.0);
    }
  }
}

TEST_CASE("q = 3 bumps cannot satisfy M_k < 1/k") {
  // Nehari normalization forces ||w||^2 above the Sobolev floor, so the
  // constraint is unattainable; the construction must fail loudly.
  const GridPtr g = build_uniform(5.0, 1001);
  CHECK_THROWS_AS(build_basis(2, 3.0, g), NumericalError);
  BasisOptions relaxed;
  relaxed.enforce_q3_constraint = false;
  const WkBasis b = build_basis(2, 3.0, g, relaxed);
  CHECK_FALSE(b.q3_constraint_met);
  CHECK(b.m_max > 0.5);
}

TEST_CASE("rescale to Nehari") {
  const GridPtr g = build_uniform(1.0, 401);
  const RadialField w = RadialField::sample(g, [](double r) { return std::pow(1.0 - r * r, 3); });
  const double q = 3.0;
  const double t = std::sqrt(h1_norm_sq(w) / lp_integral(w, 4.0));
  const RadialField s = rescale_to_nehari(w, q);
  for (int i = 0; i < g->size(); ++i) CHECK(s[i] == doctest::Approx(t * w[i]).epsilon(1e-13));
  const RadialField again = rescale_to_nehari(s, q);
  for (int i = 0; i < g->size(); ++i) CHECK(again[i] == doctest::Approx(s[i]).epsilon(1e-12));
  CHECK_THROWS_AS(rescale_to_nehari(RadialField::zeros(g), q), ConfigError);
}

TEST_CASE("combine") {
  const GridPtr g = build_uniform(2.0, 401);
  const WkBasis b = build_basis(3, 3.5, g);
  const std::vector<double> zero(3, 0.0);
  CHECK(combine(b, zero).sup_norm() == 0.0);
  const std::vector<double> e1 = {1.0, 0.0, 0.0};
  const RadialField c1 = combine(b, e1);
  for (int i = 0; i < g->size(); ++i) CHECK(c1[i] == b.bumps[0][i]);
  const std::vector<double> t = {0.7, -1.3, 2.1};
  double expected = 0.0;
  for (int i = 0; i < 3; ++i) expected += t[i] * t[i] * b.norms_sq[i];
  CHECK(h1_norm_sq(combine(b, t)) == doctest::Approx(expected).epsilon(1e-10));
  CHECK_THROWS_AS(combine(b, std::vector<double>{1.0}), ConfigError);
  CHECK(alternating_direction(3) == std::vector<double>{1.0, -1.0, 1.0});
}

TEST_CASE("transfer keeps the bumps") {
  const WkBasis b = build_basis(2, 3.5, build_uniform(5.0, 1001));
  const WkBasis t = transfer(b, build_uniform(10.0, 2001));
  for (int i = 0; i < 2; ++i) {
    CHECK(t.norms_sq[i] == doctest::Approx(b.norms_sq[i]).epsilon(1e-12));
    for (int j = 0; j < 1001; ++j) CHECK(t.bumps[i][j] == b.bumps[i][j]);
  }
  CHECK_THROWS_AS(transfer(b, build_uniform(10.0, 1001)), ConfigError);
}

TEST_CASE("basis validation") {
  const GridPtr g = build_uniform(2.0, 401);
  CHECK_THROWS_AS(build_basis(1, 3.5, g), ConfigError);
  CHECK_THROWS_AS(build_basis(2, 2.5, g), ConfigError);
}
