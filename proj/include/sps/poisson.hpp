#pragma once

#include <span>
#include <vector>

#include "sps/grid.hpp"

namespace sps {

/// Radial Newtonian potential of a density, phi(r) = (1/r) int rho(s) s min(r,s) ds,
/// so that -Delta phi = rho in R^3 with phi -> 0 at infinity.
struct Potential {
  GridPtr grid;
  std::vector<double> values;

  double operator[](int i) const { return values[static_cast<std::size_t>(i)]; }
};

/// Applies the discrete kernel to an arbitrary nodal density rho (the density is
/// extended by zero outside B_R). Two cumulative passes, O(n):
///   phi_i = (1/r_i) sum_{j<=i} q_j rho_j / 4pi + sum_{j>i} q_j rho_j / (4pi r_j),
/// and at r = 0 the limit int rho s ds plus the closed-form self term of the
/// central cell. The kernel is symmetric in the weighted inner product and is
/// the exact Green's function of `laplacian` on nodes 0..n-2.
std::vector<double> apply_kernel(const RadialGrid& grid, std::span<const double> density);

/// phi_u for density u^2.
Potential potential(const RadialField& u);

/// Per-node |-Delta phi - u^2| on nodes 0..n-2 (boundary node reported as 0).
std::vector<double> poisson_residual_profile(const RadialField& u, const Potential& phi);

/// Max of `poisson_residual_profile`.
double poisson_residual(const RadialField& u, const Potential& phi);

/// int phi_u u^2 = int int u^2(x) u^2(y) / (4 pi |x - y|).
double coulomb_integral(const RadialField& u, const Potential& phi);

}  // namespace sps
