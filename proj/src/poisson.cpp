#include "sps/poisson.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sps/error.hpp"

namespace sps {

std::vector<double> apply_kernel(const RadialGrid& grid, std::span<const double> density) {
  const int n = grid.size();
  if (static_cast<int>(density.size()) != n) throw ConfigError("density size does not match grid");
  const auto w = grid.weights();
  const auto r = grid.nodes();
  const double inv4pi = 0.25 / std::numbers::pi;

  std::vector<double> phi(static_cast<std::size_t>(n), 0.0);

  // Outer pass: sum_{j>i} q_j rho_j / (4 pi r_j).
  double outer = 0.0;
  for (int i = n - 1; i >= 1; --i) {
    phi[i] = outer;
    outer += w[i] * density[i] * inv4pi / r[i];
  }
  phi[0] = outer;

  // Inner pass: enclosed charge over r_i.
  double enclosed = w[0] * density[0] * inv4pi;
  for (int i = 1; i < n; ++i) {
    enclosed += w[i] * density[i] * inv4pi;
    phi[i] += enclosed / r[i];
  }

  // Central cell: discrete Green's function value 5/(4 pi h).
  phi[0] += w[0] * density[0] * 5.0 * inv4pi / grid.spacing();
  return phi;
}

Potential potential(const RadialField& u) {
  const auto v = u.values();
  std::vector<double> rho(v.size());
  std::transform(v.begin(), v.end(), rho.begin(), [](double x) { return x * x; });
  return Potential{u.grid_ptr(), apply_kernel(u.grid(), rho)};
}

std::vector<double> poisson_residual_profile(const RadialField& u, const Potential& phi) {
  if (phi.grid->size() != u.size() || phi.grid->radius() != u.grid().radius()) {
    throw ConfigError("potential and field live on different grids");
  }
  const auto lap = laplacian(u.grid(), phi.values);
  std::vector<double> res(lap.size(), 0.0);
  for (int i = 0; i + 1 < u.size(); ++i) res[i] = std::abs(-lap[i] - u[i] * u[i]);
  return res;
}

double poisson_residual(const RadialField& u, const Potential& phi) {
  const auto res = poisson_residual_profile(u, phi);
  return *std::max_element(res.begin(), res.end());
}

double coulomb_integral(const RadialField& u, const Potential& phi) {
  const auto w = u.grid().weights();
  double s = 0.0;
  for (int i = 0; i < u.size(); ++i) s += w[i] * phi[i] * u[i] * u[i];
  return s;
}

}  // namespace sps
