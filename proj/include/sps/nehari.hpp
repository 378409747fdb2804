#pragma once

#include <optional>
#include <vector>

#include "sps/flow.hpp"
#include "sps/grid.hpp"

namespace sps {

/// Splits u into its nodal components: maximal runs of nodes of one strict
/// sign on 0..n-2 (zero nodes belong to no component). Components have
/// disjoint nodal supports and sum to u up to the boundary node.
std::vector<RadialField> nodal_components(const RadialField& u);

/// Rescales every nodal component u_i by s_i > 0 so that s maximizes
///   E(sum_i s_i u_i) = 1/2 s^T A s + 1/4 sum_ij s_i^2 s_j^2 D_ij - sum_i s_i^{q+1} L_i / (q+1),
/// i.e. each component satisfies its own Nehari condition. Empty if the
/// stationary point cannot be found with all s_i > 0.
std::optional<RadialField> project_nodal_nehari(const RadialField& u, double q);

struct ProjectedFlowOptions {
  double dt = 1e-3;
  double dt_max = 1.0;
  double dt_min = 1e-14;
  double growth = 1.3;
  /// Stop once max|gradient| <= stop_rel * (1 + sup|u|).
  double stop_rel = 1e-7;
  int max_steps = 200000;
};

struct ProjectedFlowResult {
  explicit ProjectedFlowResult(RadialField u) : state(std::move(u)) {}

  RadialField state;
  bool converged = false;
  int steps = 0;
  int rejected = 0;
  double residual_inf = 0.0;
  std::vector<StepRecord> history;
};

/// Gradient flow constrained to the nodal Nehari set with exactly
/// `components` nodal domains: each step is the IMEX flow step followed by
/// project_nodal_nehari. A step is rejected (dt halved) if it changes the
/// number of components, the projection fails, or E increases.
ProjectedFlowResult projected_flow(const RadialField& u0, double q, int components,
                                   const ProjectedFlowOptions& options = {});

}  // namespace sps
