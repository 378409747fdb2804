#include "sps/energy.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "sps/error.hpp"

namespace sps {

void validate_exponent(double q) {
  if (!(q >= 3.0 && q < 5.0)) {
    std::ostringstream msg;
    msg << "exponent q = " << q << " outside the supported range [3, 5)";
    throw ConfigError(msg.str());
  }
}

EnergyReport energy(const RadialField& u, double q) { return energy(u, potential(u), q); }

EnergyReport energy(const RadialField& u, const Potential& phi, double q) {
  validate_exponent(q);
  EnergyReport rep;
  rep.q = q;
  rep.kinetic = 0.5 * gradient_norm_sq(u);
  rep.mass = 0.5 * inner(u, u);
  rep.coulomb = 0.25 * coulomb_integral(u, phi);
  rep.power = -lp_integral(u, q + 1.0) / (q + 1.0);
  rep.total = rep.kinetic + rep.mass + rep.coulomb + rep.power;
  return rep;
}

RadialField gradient(const RadialField& u, double q) { return gradient(u, potential(u), q); }

RadialField gradient(const RadialField& u, const Potential& phi, double q) {
  validate_exponent(q);
  const int n = u.size();
  auto g = laplacian(u.grid(), u.values());
  for (int i = 0; i + 1 < n; ++i) {
    const double ui = u[i];
    g[i] = -g[i] + ui + phi[i] * ui - std::pow(std::abs(ui), q - 1.0) * ui;
  }
  g[n - 1] = 0.0;
  return RadialField(u.grid_ptr(), std::move(g));
}

double nehari_value(const RadialField& u, double q) {
  const EnergyReport e = energy(u, q);
  // ||u||^2 + D - L with D = 4 coulomb, L = -(q+1) power
  return 2.0 * (e.kinetic + e.mass) + 4.0 * e.coulomb + (q + 1.0) * e.power;
}

double bound_identity(const RadialField& u, double q) {
  const EnergyReport e = energy(u, q);
  const double h1 = 2.0 * (e.kinetic + e.mass);
  const double lq = -(q + 1.0) * e.power;
  const double nehari = h1 + 4.0 * e.coulomb - lq;
  return e.total - 0.25 * nehari - 0.25 * h1 - (q - 3.0) / (4.0 * (q + 1.0)) * lq;
}

double g_k_max(int k, double m_k_max, double q) {
  validate_exponent(q);
  const double a = static_cast<double>(k) * m_k_max / 4.0;
  auto g = [&](double s) { return 0.5 * s * s + a * std::pow(s, 4.0) - std::pow(s, q + 1.0) / (q + 1.0); };

  if (q == 3.0) {
    // g = s^2/2 - (1 - k M_k) s^4 / 4
    const double c = 1.0 - static_cast<double>(k) * m_k_max;
    if (c <= 0.0) return std::numeric_limits<double>::infinity();
    return 1.0 / (4.0 * c);
  }

  double s_max = 1.0;
  while (g(s_max) >= 0.0) s_max *= 2.0;

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = 0.0;
  double hi = s_max;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = g(x1);
  double f2 = g(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-14 * s_max; ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = g(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = g(x1);
    }
  }
  return g(0.5 * (lo + hi));
}

double energy_upper_bound(int k, double m_k_max, double q) {
  return static_cast<double>(k) * m_k_max * g_k_max(k, m_k_max, q);
}

}  // namespace sps
