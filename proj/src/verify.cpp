#include "sps/verify.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "sps/energy.hpp"
#include "sps/error.hpp"
#include "sps/flow.hpp"
#include "sps/poisson.hpp"
#include "sps/search.hpp"

namespace sps {

namespace {

PropertyResult check(std::string name, double value, double tol, bool upper = true) {
  PropertyResult p;
  p.name = std::move(name);
  p.value = value;
  p.tolerance = tol;
  p.passed = std::isfinite(value) && (upper ? value <= tol : value >= tol);
  std::ostringstream d;
  d << (upper ? "error " : "value ") << value << (upper ? " <= " : " >= ") << tol;
  p.detail = d.str();
  return p;
}

// Smooth random field with zero trace: sum_j a_j cos((j - 1/2) pi r / R).
RadialField random_field(const GridPtr& g, std::mt19937_64& rng, double amplitude) {
  std::normal_distribution<double> normal;
  std::vector<double> a(5);
  for (double& x : a) x = amplitude * normal(rng);
  const double R = g->radius();
  return RadialField::sample(g, [&](double r) {
           double s = 0.0;
           for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * std::cos((j + 0.5) * std::numbers::pi * r / R);
           return s;
         }).with_zero_trace();
}

double indicator_error(const KernelFn& kernel, int n) {
  const GridPtr g = build_uniform(2.0, n);
  std::vector<double> rho(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) rho[i] = g->node(i) <= 1.0 ? 1.0 : 0.0;
  const auto phi = kernel(*g, rho);
  double err = 0.0;
  for (int i = 0; i < n; ++i) {
    const double exact = indicator_potential(g->node(i), 1.0);
    err = std::max(err, std::abs(phi[i] - exact) / exact);
  }
  return err;
}

double rel_diff(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale > 0.0 ? std::abs(a - b) / scale : 0.0;
}

}  // namespace

double indicator_potential(double r, double a) {
  if (r <= a) return a * a / 2.0 - r * r / 6.0;
  return a * a * a / (3.0 * r);
}

std::vector<PropertyResult> run_verification(const VerifyOptions& options) {
  const KernelFn kernel = options.kernel ? options.kernel : KernelFn(apply_kernel);
  std::vector<PropertyResult> out;
  std::mt19937_64 rng(options.seed);

  // Kernel against the indicator closed form, and its convergence order.
  const int n = options.kernel_nodes;
  if (n / 2 < RadialGrid::kMinNodes) {
    throw ConfigError("verify: kernel grid of " + std::to_string(n) + " nodes leaves " + std::to_string(n / 2) +
                      " nodes after halving, below the minimum of " + std::to_string(RadialGrid::kMinNodes));
  }
  const double e1 = indicator_error(kernel, n / 2);
  const double e2 = indicator_error(kernel, n);
  const double e3 = indicator_error(kernel, 2 * n);
  out.push_back(check("kernel_indicator", e2, 1e-5));
  out.push_back(check("kernel_order", std::min(std::log2(e1 / e2), std::log2(e2 / e3)), 1.8, false));

  const GridPtr g = build_uniform(5.0, 513);

  {
    const RadialField a = random_field(g, rng, 1.0);
    const RadialField b = random_field(g, rng, 1.0);
    std::vector<double> ra(a.values().begin(), a.values().end());
    std::vector<double> rb(b.values().begin(), b.values().end());
    const RadialField ka(g, kernel(*g, ra));
    const RadialField kb(g, kernel(*g, rb));
    out.push_back(check("kernel_symmetry", rel_diff(inner(ka, b), inner(a, kb)), 1e-12));

    std::vector<double> rho(static_cast<std::size_t>(g->size()));
    for (int i = 0; i < g->size(); ++i) rho[i] = a[i] * a[i];
    const auto phi = kernel(*g, rho);
    const auto lap = laplacian(*g, phi);
    double res = 0.0;
    double scale = 0.0;
    for (int i = 0; i + 1 < g->size(); ++i) {
      res = std::max(res, std::abs(-lap[i] - rho[i]));
      scale = std::max(scale, std::abs(rho[i]));
    }
    out.push_back(check("poisson_residual", res / scale, 1e-8));
  }

  {
    const RadialField r2 = RadialField::sample(g, [](double r) { return r * r; });
    const RadialField lap = laplacian(r2);
    double err = 0.0;
    for (int i = 0; i + 1 < g->size(); ++i) err = std::max(err, std::abs(lap[i] - 6.0));
    out.push_back(check("laplacian_r2", err / 6.0, 1e-10));
    double vol = 0.0;
    for (double w : g->weights()) vol += w;
    out.push_back(check("ball_volume", rel_diff(vol, 4.0 * std::numbers::pi * 125.0 / 3.0), 1e-13));
  }

  {
    const double q = 3.5;
    const double eps = 1e-5;
    double worst_grad = 0.0;
    double worst_jac = 0.0;
    for (int p = 0; p < options.random_pairs; ++p) {
      const RadialField u = random_field(g, rng, 1.0);
      const RadialField v = random_field(g, rng, 1.0);
      const double fd = (energy(u + eps * v, q).total - energy(u - eps * v, q).total) / (2.0 * eps);
      worst_grad = std::max(worst_grad, rel_diff(inner(gradient(u, q), v), fd));

      const RadialField jfd = (1.0 / (2.0 * eps)) * (gradient(u + eps * v, q) - gradient(u - eps * v, q));
      const RadialField jv = jacobian_action(u, q, v);
      double num = 0.0;
      double den = 0.0;
      for (int i = 0; i < u.size(); ++i) {
        num = std::max(num, std::abs(jfd[i] - jv[i]));
        den = std::max(den, std::abs(jv[i]));
      }
      worst_jac = std::max(worst_jac, num / den);
    }
    out.push_back(check("gradient_fd", worst_grad, 1e-6));
    out.push_back(check("jacobian_fd", worst_jac, 1e-6));
  }

  {
    double worst = 0.0;
    for (double q : {3.0, 3.5, 4.0, 4.9}) {
      for (int p = 0; p < options.identity_fields; ++p) {
        const RadialField u = random_field(g, rng, 2.0);
        const EnergyReport e = energy(u, q);
        const double scale = std::abs(e.kinetic) + std::abs(e.mass) + std::abs(e.coulomb) + std::abs(e.power);
        worst = std::max(worst, std::abs(bound_identity(u, q)) / scale);
      }
    }
    out.push_back(check("bound_identity", worst, 1e-12));
  }

  {
    const RadialField u = random_field(g, rng, 2.0);
    const double q = 3.5;
    out.push_back(check("energy_even", std::abs(energy(u, q).total - energy(-u, q).total), 0.0));
    const RadialField a = step(u, q, 1e-3);
    const RadialField b = step(-u, q, 1e-3);
    double err = 0.0;
    for (int i = 0; i < u.size(); ++i) err = std::max(err, std::abs(a[i] + b[i]));
    out.push_back(check("step_odd", err, 0.0));
  }
  return out;
}

}  // namespace sps
