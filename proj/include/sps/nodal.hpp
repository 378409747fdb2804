#pragma once

#include <optional>
#include <vector>

#include "sps/grid.hpp"

namespace sps {

struct Extremum {
  double radius = 0.0;
  double value = 0.0;
};

struct NodalProfile {
  int count = 0;
  std::vector<double> crossings;  ///< strictly increasing radii in (0, R)
  std::vector<Extremum> extrema;  ///< positive local maxima / negative local minima
};

/// Relative zero threshold used when none is given: 1e-8 * max|u|.
inline constexpr double kDefaultRelativeZero = 1e-8;

/// Number of strict sign alternations among nodes with |u_i| > eps (the
/// boundary node is excluded). Crossings are placed by linear interpolation
/// between the two nodes of opposite sign that bracket each change.
/// When `eps` is empty it defaults to 1e-8 * max|u|.
NodalProfile sign_changes(const RadialField& u, std::optional<double> eps = std::nullopt);

/// Positive discrete local maxima and negative discrete local minima over
/// nodes 0..n-2; node 0 is compared with its reflection u(-h) = u(h). Flat
/// tops report their outermost node.
std::vector<Extremum> extrema_amplitudes(const RadialField& u);

}  // namespace sps
