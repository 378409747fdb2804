#pragma once

#include "sps/grid.hpp"
#include "sps/poisson.hpp"

namespace sps {

/// Supported nonlinearity exponents: q in [3, 5).
void validate_exponent(double q);

struct EnergyReport {
  double total = 0.0;
  double kinetic = 0.0;  ///< (1/2) int |grad u|^2
  double mass = 0.0;     ///< (1/2) int u^2
  double coulomb = 0.0;  ///< (1/4) int phi_u u^2
  double power = 0.0;    ///< -(1/(q+1)) int |u|^{q+1}
  double q = 3.0;
};

/// E(u) = 1/2 int|grad u|^2 + 1/2 int u^2 + 1/4 int phi_u u^2 - 1/(q+1) int |u|^{q+1}.
EnergyReport energy(const RadialField& u, double q);
EnergyReport energy(const RadialField& u, const Potential& phi, double q);

/// Strong-form residual g = -Delta u + u + phi_u u - |u|^{q-1} u on nodes
/// 0..n-2, zero on the boundary node. For fields with zero trace this is the
/// exact gradient of `energy` in the weighted L^2 inner product.
RadialField gradient(const RadialField& u, double q);
RadialField gradient(const RadialField& u, const Potential& phi, double q);

/// E'(u)(u) = ||u||^2 + int phi_u u^2 - ||u||_{q+1}^{q+1}.
double nehari_value(const RadialField& u, double q);

/// E(u) - E'(u)(u)/4 - ||u||^2/4 - (q-3)/(4(q+1)) ||u||_{q+1}^{q+1}; an algebraic
/// identity among the energy parts, so it vanishes up to rounding.
double bound_identity(const RadialField& u, double q);

/// G_k = max_{s >= 0} s^2/2 + (k M_k / 4) s^4 - s^{q+1}/(q+1), found by
/// golden-section search. Infinite when q = 3 and k M_k >= 1.
double g_k_max(int k, double m_k_max, double q);

/// C_k = k M_k G_k, the upper bound of E on the bump subspace.
double energy_upper_bound(int k, double m_k_max, double q);

}  // namespace sps
