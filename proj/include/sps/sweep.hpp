#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sps/search.hpp"

namespace sps {

struct SweepOptions {
  double density = 200.0;  ///< nodes per unit length; h = 1 / density for every radius
  SearchOptions search;
  /// Seed Newton at R_{i+1} with the zero-extended R_i candidate; runs sequentially.
  bool warm_start = false;
  int jobs = 1;
  double probe_radius = 5.0;  ///< rho for the profile distances (clamped to the smallest radius)
  double crossing_tolerance = 0.05;
};

struct SweepEntry {
  double radius = 0.0;
  std::optional<SearchResult> result;
  std::string error;  ///< empty when result is set
};

struct SweepReport {
  int k = 0;
  double q = 0.0;
  double density = 0.0;
  std::vector<double> radii;
  std::vector<SweepEntry> entries;
  WkBasis basis;  ///< shared basis (built on the smallest radius)
  double m_k = 0.0;
  double c_k = 0.0;  ///< k M_k G_k of the shared basis
  bool all_accepted = false;
  bool energy_bound = false;  ///< E(u_R) <= C_k for every accepted entry
  bool h1_bound = false;      ///< ||u_R||^2 <= 4 C_k for every accepted entry
  double probe_radius = 0.0;
  std::vector<double> distances;         ///< sup_[0,rho] |u_{R_i} - u_{R_{i+1}}|
  std::vector<double> outer_crossings;   ///< outermost crossing radius per accepted entry
  bool crossings_agree = false;          ///< max/min - 1 <= crossing_tolerance
  std::vector<double> strauss;           ///< strauss_envelope per accepted entry
};

/// Runs the search on every radius with one W_k basis (supports lie in B_1,
/// so the basis built for the smallest radius is transferred). Per-radius
/// failures are recorded in the entry, never thrown.
SweepReport run_sweep(int k, double q, const std::vector<double>& radii, const SweepOptions& options = {});

/// sup over [0, rho] of |u - v|, evaluated on the nodes of u's grid in [0, rho]
/// with piecewise-linear interpolation of v.
double profile_distance(const RadialField& u, const RadialField& v, double rho);

/// Distances between consecutive accepted entries of the report.
std::vector<double> profile_convergence(const SweepReport& report, double rho);

/// max_{r >= 1} |u(r)| r / ||u||_{H^1}; 0 if u vanishes for r >= 1.
double strauss_envelope(const RadialField& u);

}  // namespace sps
