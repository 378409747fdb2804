#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sps/grid.hpp"

namespace sps {

/// Integration and classification parameters of the parabolic flow
///   u_t - Delta u + u = |u|^{q-1} u - phi_u u,   u = 0 on the sphere r = R.
struct FlowConfig {
  double dt = 2e-3;               ///< initial step; steps grow to dt_max_factor * dt
  double t_max = 200.0;           ///< horizon
  double decay_threshold = 1e-3;  ///< sup|u| below this: the state is in the basin of 0
  double blowup_cap = 1e6;        ///< sup|u| above this: blow-up
  /// E below this: blow-up. Every nonzero equilibrium has E > 0 for q >= 3, so
  /// any negative floor certifies that the trajectory cannot settle.
  double energy_floor = -1.0;
  /// Stagnation when ||u_t||_2 < stagnation_rel * ||u0||_2.
  double stagnation_rel = 1e-8;
  int snapshot_stride = 200;      ///< store every n-th accepted step (plus first and last)
  double dt_max_factor = 10.0;
  double dt_min = 1e-12;
  double energy_slack = 1e-10;
  /// Accepted steps satisfy |dE + dt ||u_t||^2| <= tol * dt ||u_t||^2 whenever
  /// dt ||u_t||^2 is above the rounding level of E.
  double dissipation_tolerance = 0.1;
  /// Candidate harvesting keeps the state of least ||u_t||_2 / ||u||_2. Only
  /// states with sup|u| >= harvest_floor and, when harvest_nodal_count >= 0,
  /// exactly that many sign changes are considered.
  double harvest_floor = 0.5;
  int harvest_nodal_count = -1;
  bool keep_profiles = true;

  void validate() const;
};

enum class Verdict { DecaysToZero, BlowsUp, Stagnates, HorizonReached };

std::string to_string(Verdict v);

struct Snapshot {
  double t = 0.0;
  std::optional<RadialField> field;
  double energy = 0.0;
  double ut_norm = 0.0;
  int nodal_count = 0;
};

/// One accepted step, for the energy-history artifact and dissipation audits.
struct StepRecord {
  double t = 0.0;       ///< time after the step
  double dt = 0.0;
  double energy = 0.0;  ///< E after the step
  double energy_before = 0.0;
  double ut_norm = 0.0;
  int nodal_count = 0;
  double sup_norm = 0.0;
};

struct FlowTrajectory {
  explicit FlowTrajectory(RadialField initial) : final_state(std::move(initial)) {}

  std::vector<Snapshot> snapshots;
  std::vector<StepRecord> steps;
  Verdict verdict = Verdict::HorizonReached;
  RadialField final_state;
  /// State of minimal ||u_t|| / ||u|| among harvestable states, if any.
  std::optional<Snapshot> harvest;
  int rejected_steps = 0;

  /// First index at which the nodal count increases, or -1.
  int nodal_monotonicity_violation() const;
  /// First index at which the energy increases beyond `slack`, or -1.
  int energy_monotonicity_violation(double slack = 1e-10) const;
};

/// One IMEX step: (I - dt (Delta - I - phi_u)) u_new = u + dt |u|^{q-1} u,
/// with phi_u frozen at u and the boundary value pinned to 0. Both factors
/// preserve signs, so the step never increases the discrete zero number.
RadialField step(const RadialField& u, double q, double dt);

/// Adaptive integration until a verdict is reached. Throws NumericalError if
/// the step size underflows cfg.dt_min.
FlowTrajectory integrate(const RadialField& u0, double q, const FlowConfig& cfg);

}  // namespace sps
