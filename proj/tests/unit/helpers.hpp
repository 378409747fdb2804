#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "sps/grid.hpp"

namespace testing {

// Smooth random field with zero trace.
inline sps::RadialField random_field(const sps::GridPtr& g, std::mt19937_64& rng, double amplitude = 1.0) {
  std::normal_distribution<double> normal;
  std::vector<double> a(5);
  for (double& x : a) x = amplitude * normal(rng);
  const double R = g->radius();
  return sps::RadialField::sample(g, [&](double r) {
           double s = 0.0;
           for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * std::cos((j + 0.5) * std::numbers::pi * r / R);
           return s;
         }).with_zero_trace();
}

inline double max_abs_diff(const sps::RadialField& a, const sps::RadialField& b) {
  double m = 0.0;
  for (int i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace testing
