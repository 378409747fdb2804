#include "sps/nehari.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "sps/energy.hpp"
#include "sps/error.hpp"
#include "sps/nodal.hpp"
#include "sps/poisson.hpp"

namespace sps {

namespace {

// Bilinear form of kinetic + mass energy (the discrete H^1 inner product).
double h1_inner(const RadialField& a, const RadialField& b) {
  const auto c = a.grid().conductances();
  double s = 0.0;
  for (int m = 0; m + 1 < a.size(); ++m) s += c[m] * (a[m + 1] - a[m]) * (b[m + 1] - b[m]);
  return s + inner(a, b);
}

double inf_norm(const RadialField& g) {
  double m = 0.0;
  for (double x : g.values()) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

std::vector<RadialField> nodal_components(const RadialField& u) {
  std::vector<RadialField> out;
  std::vector<double> cur(static_cast<std::size_t>(u.size()), 0.0);
  int last = 0;
  for (int i = 0; i + 1 < u.size(); ++i) {
    const int s = u[i] > 0.0 ? 1 : (u[i] < 0.0 ? -1 : 0);
    if (s == 0) continue;
    if (last != 0 && s != last) {
      out.emplace_back(u.grid_ptr(), cur);
      cur.assign(cur.size(), 0.0);
    }
    cur[i] = u[i];
    last = s;
  }
  if (last != 0) out.emplace_back(u.grid_ptr(), std::move(cur));
  return out;
}

std::optional<RadialField> project_nodal_nehari(const RadialField& u, double q) {
  validate_exponent(q);
  const std::vector<RadialField> comps = nodal_components(u);
  const int k = static_cast<int>(comps.size());
  if (k == 0) return std::nullopt;

  const auto w = u.grid().weights();
  Eigen::MatrixXd a(k, k);
  Eigen::MatrixXd d(k, k);
  Eigen::VectorXd l(k);
  std::vector<std::vector<double>> phi(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    std::vector<double> rho(static_cast<std::size_t>(u.size()));
    for (int m = 0; m < u.size(); ++m) rho[m] = comps[i][m] * comps[i][m];
    phi[i] = apply_kernel(u.grid(), rho);
    l(i) = lp_integral(comps[i], q + 1.0);
  }
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      a(i, j) = h1_inner(comps[i], comps[j]);
      double s = 0.0;
      for (int m = 0; m < u.size(); ++m) s += w[m] * phi[i][m] * comps[j][m] * comps[j][m];
      d(i, j) = s;
    }
  }

  auto grad = [&](const Eigen::VectorXd& s) {
    Eigen::VectorXd g(k);
    for (int i = 0; i < k; ++i) {
      double coul = 0.0;
      for (int j = 0; j < k; ++j) coul += d(i, j) * s(j) * s(j);
      g(i) = a.row(i).dot(s) + s(i) * coul - l(i) * std::pow(s(i), q);
    }
    return g;
  };

  // Newton from s = 1 on G_i = g_i / s_i, whose roots exclude the trivial
  // branch s_i = 0 of the stationarity conditions g_i = 0.
  Eigen::VectorXd s = Eigen::VectorXd::Ones(k);
  const double scale = a.diagonal().maxCoeff();
  bool done = false;
  for (int it = 0; it < 100; ++it) {
    const Eigen::VectorXd g = grad(s);
    const Eigen::VectorXd reduced = g.cwiseQuotient(s);
    if (reduced.cwiseAbs().maxCoeff() <= 1e-13 * scale) {
      done = true;
      break;
    }
    Eigen::MatrixXd hess = a;
    for (int i = 0; i < k; ++i) {
      double coul = 0.0;
      for (int j = 0; j < k; ++j) {
        coul += d(i, j) * s(j) * s(j);
        hess(i, j) += 2.0 * s(i) * d(i, j) * s(j);
      }
      hess(i, i) += coul - q * l(i) * std::pow(s(i), q - 1.0);
    }
    Eigen::MatrixXd jac = s.cwiseInverse().asDiagonal() * hess;
    for (int i = 0; i < k; ++i) jac(i, i) -= g(i) / (s(i) * s(i));
    const Eigen::VectorXd step = jac.fullPivLu().solve(reduced);
    if (!step.allFinite()) return std::nullopt;
    double lambda = 1.0;
    while ((s - lambda * step).minCoeff() <= 0.1 * s.minCoeff()) lambda *= 0.5;
    s -= lambda * step;
  }
  if (!done) return std::nullopt;

  RadialField out = RadialField::zeros(u.grid_ptr());
  for (int i = 0; i < k; ++i) out += s(i) * comps[i];
  return out;
}

ProjectedFlowResult projected_flow(const RadialField& u0, double q, int components,
                                   const ProjectedFlowOptions& options) {
  validate_exponent(q);
  if (components < 1) throw ConfigError("projected flow needs at least one component");
  if (!(options.dt > 0.0) || !(options.dt_max >= options.dt) || !(options.growth >= 1.0)) {
    throw ConfigError("projected flow: invalid step controls");
  }

  RadialField start = u0.with_zero_trace();
  if (static_cast<int>(nodal_components(start).size()) != components) {
    throw ConfigError("projected flow: initial datum has the wrong number of nodal components");
  }
  auto projected = project_nodal_nehari(start, q);
  if (!projected) throw NumericalError("projected flow: initial Nehari projection failed");

  ProjectedFlowResult res(*projected);
  RadialField& u = res.state;
  double e = energy(u, q).total;
  double dt = options.dt;
  double t = 0.0;

  while (res.steps < options.max_steps) {
    res.residual_inf = inf_norm(gradient(u, q));
    if (res.residual_inf <= options.stop_rel * (1.0 + u.sup_norm())) {
      res.converged = true;
      break;
    }
    if (dt < options.dt_min) break;

    std::optional<RadialField> v;
    try {
      RadialField trial = step(u, q, dt);
      if (static_cast<int>(nodal_components(trial).size()) == components) v = project_nodal_nehari(trial, q);
    } catch (const NumericalError&) {
      v.reset();
    }
    double ev = v ? energy(*v, q).total : 0.0;
    if (!v || !std::isfinite(ev) || ev > e + 1e-12 * std::abs(e)) {
      ++res.rejected;
      dt *= 0.5;
      continue;
    }

    const double ut = l2_norm(*v - u) / dt;
    const double e_before = e;
    u = std::move(*v);
    e = ev;
    t += dt;
    ++res.steps;
    res.history.push_back({t, dt, e, e_before, ut, sign_changes(u).count, u.sup_norm()});
    dt = std::min(dt * options.growth, options.dt_max);
  }
  return res;
}

}  // namespace sps
