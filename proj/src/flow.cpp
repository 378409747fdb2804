#include "sps/flow.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "sps/energy.hpp"
#include "sps/error.hpp"
#include "sps/nodal.hpp"
#include "sps/poisson.hpp"

namespace sps {

namespace {

// Solves (I - dt (Delta - I - diag(phi))) x = rhs on nodes 0..n-2 with
// x_{n-1} = 0. The matrix is a tridiagonal M-matrix, so the solve cannot
// create sign changes.
std::vector<double> solve_implicit(const RadialGrid& g, std::vector<double> rhs, const Potential& phi, double dt) {
  const int n = g.size();
  const int m = n - 1;  // unknowns 0..n-2
  const auto w = g.weights();
  const auto c = g.conductances();

  std::vector<double> upper(static_cast<std::size_t>(m), 0.0);
  double prev_upper = 0.0;
  for (int i = 0; i < m; ++i) {
    const double left = i > 0 ? dt * c[i - 1] / w[i] : 0.0;
    const double right = dt * c[i] / w[i];
    const double diag = 1.0 + dt * (1.0 + phi[i]) + left + right;
    const double lower = -left;
    const double denom = diag - lower * prev_upper;
    if (!(denom > 0.0)) throw NumericalError("implicit solve: singular tridiagonal system");
    // the coupling to node n-1 drops out because x_{n-1} = 0
    upper[i] = i + 1 < m ? -right / denom : 0.0;
    rhs[i] = (rhs[i] - lower * (i > 0 ? rhs[i - 1] : 0.0)) / denom;
    prev_upper = upper[i];
  }
  for (int i = m - 2; i >= 0; --i) rhs[i] -= upper[i] * rhs[i + 1];
  rhs[n - 1] = 0.0;
  return rhs;
}

struct Evaluated {
  Potential phi;
  EnergyReport energy;
  double parts_scale;
};

Evaluated evaluate(const RadialField& u, double q) {
  Potential phi = potential(u);
  EnergyReport e = energy(u, phi, q);
  const double scale = std::abs(e.kinetic) + std::abs(e.mass) + std::abs(e.coulomb) + std::abs(e.power);
  return {std::move(phi), e, scale};
}

RadialField imex_step(const RadialField& u, const Potential& phi, double q, double dt) {
  const int n = u.size();
  std::vector<double> rhs(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double ui = u[i];
    rhs[i] = ui * (1.0 + dt * std::pow(std::abs(ui), q - 1.0));
  }
  return RadialField(u.grid_ptr(), solve_implicit(u.grid(), std::move(rhs), phi, dt));
}

}  // namespace

void FlowConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) throw ConfigError(std::string("flow config: ") + name + " must be positive");
  };
  positive(dt, "dt");
  positive(t_max, "t_max");
  positive(decay_threshold, "decay threshold");
  positive(blowup_cap, "blow-up cap");
  positive(stagnation_rel, "stagnation tolerance");
  positive(dt_max_factor, "dt growth cap");
  positive(dt_min, "dt floor");
  positive(dissipation_tolerance, "dissipation tolerance");
  if (snapshot_stride < 1) throw ConfigError("flow config: snapshot stride must be >= 1");
  if (!(decay_threshold < 1.0)) throw ConfigError("flow config: decay threshold must be < 1");
  if (!(energy_floor < 0.0)) throw ConfigError("flow config: energy floor must be negative");
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::DecaysToZero: return "DecaysToZero";
    case Verdict::BlowsUp: return "BlowsUp";
    case Verdict::Stagnates: return "Stagnates";
    case Verdict::HorizonReached: return "HorizonReached";
  }
  return "unknown";
}

int FlowTrajectory::nodal_monotonicity_violation() const {
  for (std::size_t i = 1; i < steps.size(); ++i) {
    if (steps[i].nodal_count > steps[i - 1].nodal_count) return static_cast<int>(i);
  }
  for (std::size_t i = 1; i < snapshots.size(); ++i) {
    if (snapshots[i].nodal_count > snapshots[i - 1].nodal_count) return static_cast<int>(i);
  }
  return -1;
}

int FlowTrajectory::energy_monotonicity_violation(double slack) const {
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (steps[i].energy > steps[i].energy_before + slack) return static_cast<int>(i);
  }
  return -1;
}

RadialField step(const RadialField& u, double q, double dt) {
  validate_exponent(q);
  if (!(dt > 0.0)) throw ConfigError("time step must be positive");
  return imex_step(u, potential(u), q, dt);
}

FlowTrajectory integrate(const RadialField& u0, double q, const FlowConfig& cfg) {
  validate_exponent(q);
  cfg.validate();

  RadialField u = u0.with_zero_trace();
  FlowTrajectory traj(u);
  Evaluated cur = evaluate(u, q);
  int nodal = sign_changes(u).count;
  const double eta = cfg.stagnation_rel * l2_norm(u);

  auto snapshot = [&](double t, const RadialField& f, double e, double ut, int nc) {
    Snapshot s;
    s.t = t;
    if (cfg.keep_profiles) s.field = f;
    s.energy = e;
    s.ut_norm = ut;
    s.nodal_count = nc;
    traj.snapshots.push_back(std::move(s));
  };

  snapshot(0.0, u, cur.energy.total, std::numeric_limits<double>::quiet_NaN(), nodal);

  auto classify = [&](const RadialField& f, double e, double ut) -> std::optional<Verdict> {
    const double sup = f.sup_norm();
    if (sup < cfg.decay_threshold) return Verdict::DecaysToZero;
    if (sup > cfg.blowup_cap || e < cfg.energy_floor) return Verdict::BlowsUp;
    if (ut < eta) return Verdict::Stagnates;
    return std::nullopt;
  };

  if (auto v = classify(u, cur.energy.total, std::numeric_limits<double>::infinity())) {
    traj.verdict = *v;
    traj.final_state = u;
    return traj;
  }

  const double dt_max = cfg.dt_max_factor * cfg.dt;
  double dt = cfg.dt;
  double t = 0.0;
  int clean = 0;
  int accepted = 0;
  double harvest_rel = 0.0;

  while (true) {
    if (t >= cfg.t_max) {
      traj.verdict = Verdict::HorizonReached;
      break;
    }
    const double h = std::min(dt, cfg.t_max - t);

    std::optional<RadialField> next;
    try {
      next.emplace(imex_step(u, cur.phi, q, h));
    } catch (const NumericalError&) {
      next.reset();
    }

    bool ok = next.has_value();
    Evaluated nxt;
    double ut2 = 0.0;
    if (ok) {
      nxt = evaluate(*next, q);
      const auto w = u.grid().weights();
      for (int i = 0; i < u.size(); ++i) {
        const double d = ((*next)[i] - u[i]) / h;
        ut2 += w[i] * d * d;
      }
      const double de = nxt.energy.total - cur.energy.total;
      const double predicted = h * ut2;
      const double rounding = 1e-13 * std::max(cur.parts_scale, nxt.parts_scale);
      ok = std::isfinite(nxt.energy.total) && de <= cfg.energy_slack;
      if (ok && predicted > rounding) {
        ok = std::abs(de + predicted) <= cfg.dissipation_tolerance * predicted;
      }
    }

    if (!ok) {
      ++traj.rejected_steps;
      clean = 0;
      dt = 0.5 * h;
      if (dt < cfg.dt_min) {
        std::ostringstream msg;
        msg << "time step underflow at t = " << t << " (dt = " << dt << ", sup|u| = " << u.sup_norm()
            << ", E = " << cur.energy.total << ")";
        throw NumericalError(msg.str());
      }
      continue;
    }

    const double e_before = cur.energy.total;
    u = std::move(*next);
    cur = std::move(nxt);
    t += h;
    ++accepted;
    nodal = sign_changes(u).count;
    const double ut = std::sqrt(ut2);
    const double sup = u.sup_norm();

    traj.steps.push_back({t, h, cur.energy.total, e_before, ut, nodal, sup});

    if (sup >= cfg.harvest_floor && (cfg.harvest_nodal_count < 0 || nodal == cfg.harvest_nodal_count)) {
      const double rel = ut / l2_norm(u);
      if (!traj.harvest || rel < harvest_rel) {
        harvest_rel = rel;
        Snapshot s;
        s.t = t;
        s.field = u;
        s.energy = cur.energy.total;
        s.ut_norm = ut;
        s.nodal_count = nodal;
        traj.harvest = std::move(s);
      }
    }

    const auto verdict = classify(u, cur.energy.total, ut);
    if (verdict || accepted % cfg.snapshot_stride == 0) snapshot(t, u, cur.energy.total, ut, nodal);
    if (verdict) {
      traj.verdict = *verdict;
      traj.final_state = u;
      return traj;
    }

    if (++clean >= 10) {
      dt = std::min(1.2 * dt, dt_max);
      clean = 0;
    }
  }

  if (traj.snapshots.back().t != t) {
    const double ut = traj.steps.empty() ? 0.0 : traj.steps.back().ut_norm;
    snapshot(t, u, cur.energy.total, ut, nodal);
  }
  traj.final_state = u;
  return traj;
}

}  // namespace sps
