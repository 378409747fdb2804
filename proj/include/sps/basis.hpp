#pragma once

#include <span>
#include <vector>

#include "sps/grid.hpp"

namespace sps {

struct BasisOptions {
  int min_nodes_per_bump = 32;
  /// When q = 3 the bumps must also satisfy M_k < 1/k.
  bool enforce_q3_constraint = true;
  double width_factor_step = 0.8;
  int max_width_retries = 50;
};

/// k Nehari-normalized radial bumps with disjoint supports inside B_1:
/// w_1 on the ball [0, 1/k], w_i on the annulus [(i-1)/k, i/k].
struct WkBasis {
  int k = 0;
  double q = 3.0;
  std::vector<RadialField> bumps;
  std::vector<double> norms_sq;  ///< ||w_i||^2 (H^1)
  double m_max = 0.0;            ///< M_k
  double m_min = 0.0;            ///< m_k
  double width_factor = 1.0;     ///< support width relative to its annulus
  bool q3_constraint_met = false;
};

/// Profile (1 - s^2)^3 centred at r = 0 for the inner ball and at the annulus
/// midpoint otherwise, rescaled onto the Nehari set. For q = 3 the supports
/// are narrowed or widened around their midpoints until M_k < 1/k; failure to
/// make strict progress is reported as a NumericalError.
WkBasis build_basis(int k, double q, GridPtr grid, const BasisOptions& options = {});

/// t w with t = (||w||^2 / ||w||_{q+1}^{q+1})^{1/(q-1)}.
RadialField rescale_to_nehari(const RadialField& w, double q);

/// sum_j t_j w_j.
RadialField combine(const WkBasis& basis, std::span<const double> t);

/// Same bumps zero-extended to another grid with identical spacing (supports
/// lie in B_1, so the basis does not depend on R).
WkBasis transfer(const WkBasis& basis, GridPtr grid);

/// The alternating direction (+1, -1, +1, ...).
std::vector<double> alternating_direction(int k);

}  // namespace sps
