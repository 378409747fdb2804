#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sps/basis.hpp"
#include "sps/energy.hpp"
#include "sps/flow.hpp"
#include "sps/grid.hpp"
#include "sps/nehari.hpp"
#include "sps/nodal.hpp"

namespace sps {

/// A refined equilibrium together with its certificates.
struct EquilibriumCandidate {
  explicit EquilibriumCandidate(RadialField field) : u(std::move(field)) {}

  RadialField u;
  int k = 0;
  double q = 3.0;
  double radius = 0.0;
  double residual_inf = 0.0;
  double residual_l2 = 0.0;
  EnergyReport energy;
  NodalProfile nodal;
  double nehari = 0.0;
  int newton_iterations = 0;
  std::vector<double> residual_history;  ///< residual_inf before each iteration and at the end
};

/// One archived bisection probe.
struct Probe {
  double t = 0.0;
  Verdict verdict = Verdict::HorizonReached;
  double t_end = 0.0;
  int nodal_end = 0;
  bool nodal_monotone = true;  ///< nodal count never increased along the probe
};

struct ThresholdBracket {
  std::vector<double> direction;
  double t_low = 0.0;   ///< DecaysToZero
  double t_high = 0.0;  ///< anything else
  std::vector<Probe> probes;

  double width() const { return t_high - t_low; }
};

struct BisectOptions {
  double seed_low = 1e-3;
  double seed_high = 40.0;
  int max_doublings = 10;
  double tol = 1e-6;  ///< stop when width <= tol * t_high
  int max_probes = 200;
};

/// Verdict of the trajectory started at amplitude t (plus optional bookkeeping).
using ProbeClassifier = std::function<Probe(double t)>;

/// Runs integrate(combine(basis, t d)) and reports its verdict.
Verdict classify(double t, std::span<const double> d, const WkBasis& basis, const FlowConfig& cfg);

/// Bisection on an arbitrary classifier; only DecaysToZero counts as "below".
/// Throws SearchError(SeedBracketFailed) if the seeds cannot be arranged.
ThresholdBracket bisect_threshold(const ProbeClassifier& probe, std::vector<double> direction,
                                  const BisectOptions& options = {});

ThresholdBracket bisect_threshold(std::span<const double> d, const WkBasis& basis, const FlowConfig& cfg,
                                  double tol);

struct NewtonOptions {
  int max_iterations = 60;
  int max_halvings = 5;  ///< consecutive damped attempts before NewtonDiverged
};

/// Jacobian of `gradient` at u applied to v:
///   -Delta v + v + phi_u v + 2 u K(u v) - q |u|^{q-1} v,
/// zero on the boundary node.
RadialField jacobian_action(const RadialField& u, double q, const RadialField& v);

/// Damped Newton on gradient(u) = 0 with the residual max-norm as merit
/// function. Stops once residual_inf <= tol. The linear systems are solved
/// exactly through a sparse factorization of the Jacobian augmented by the
/// cumulative sums of the Poisson kernel.
EquilibriumCandidate refine_newton(const RadialField& u0, double q, double tol, const NewtonOptions& options = {});

/// Default Newton stopping threshold 1e-8 * (1 + sup|u|), reduced by `margin`.
double residual_tolerance(const RadialField& u, double margin = 0.5);

/// refine_newton to residual_tolerance of the final state (the tolerance
/// scales with sup|u|, which Newton may change).
EquilibriumCandidate refine_to_tolerance(const RadialField& u, double q, const NewtonOptions& options = {});

/// Fills the certificates (residuals, energy, nodal profile, Nehari value).
void certify(EquilibriumCandidate& c, double q);

struct ExtractOptions {
  int max_retries = 8;
  double horizon_factor = 2.0;  ///< t_max multiplier for extraction runs
  double harvest_floor = 0.5;   ///< delta: harvested states need sup|u| >= delta
  NewtonOptions newton;
};

/// Runs the flow from amplitude t along the bracket direction.
using TrajectoryRunner = std::function<FlowTrajectory(double t)>;

/// Integrates from t_mid, harvests the state of least relative ||u_t|| with
/// k-1 sign changes and refines it by Newton. On failure (no harvest, Newton
/// failure, nodal count changed by Newton, invariants violated) retries at
/// t_high - (t_high - t_low) / 2^{j+1}. Throws SearchError after the retries;
/// the kind is that of the last failure. `archive`, if given, receives every
/// trajectory.
EquilibriumCandidate extract_candidate(const ThresholdBracket& bracket, int k, double q,
                                       const TrajectoryRunner& runner, const ExtractOptions& options = {},
                                       std::vector<FlowTrajectory>* archive = nullptr);

EquilibriumCandidate extract_candidate(const ThresholdBracket& bracket, const WkBasis& basis, const FlowConfig& cfg,
                                       const ExtractOptions& options = {},
                                       std::vector<FlowTrajectory>* archive = nullptr);

/// Tolerances of the acceptance check.
struct AcceptanceLimits {
  double residual_rel = 1e-8;
  double nehari_rel = 1e-6;
  double amplitude_min = 0.99;
};

/// Empty when the candidate satisfies all invariants for k, otherwise the
/// first violated one.
std::optional<std::string> rejection_reason(const EquilibriumCandidate& c, int k, const AcceptanceLimits& limits = {});

/// Nodes strictly inside the innermost nodal domain (resolution diagnostic).
int innermost_domain_nodes(const RadialField& u);

struct SearchOptions {
  FlowConfig flow;
  double bisect_tol = 1e-6;
  ExtractOptions extract;
  int fallback_directions = 2;  ///< seeded random directions tried after the given one
  unsigned long long seed = 0;
  bool projected_fallback = true;
  ProjectedFlowOptions projection;
  AcceptanceLimits limits;
};

enum class SearchRoute { Threshold, ProjectedFlow, WarmStart };

std::string to_string(SearchRoute route);

struct SearchAttempt {
  std::string stage;    ///< e.g. "threshold d=(1,-1)"
  std::string outcome;  ///< "accepted" or the failure message
};

struct SearchResult {
  explicit SearchResult(EquilibriumCandidate c) : candidate(std::move(c)) {}

  EquilibriumCandidate candidate;
  SearchRoute route = SearchRoute::Threshold;
  ThresholdBracket bracket;  ///< bracket along the direction that seeded the candidate
  std::vector<SearchAttempt> log;
  std::vector<StepRecord> history;  ///< trajectory of the route that produced the candidate
  int trajectories = 0;             ///< flow runs audited for nodal monotonicity
  int nodal_violations = 0;         ///< runs whose nodal count increased
};

/// Full pipeline: threshold bisection along `direction`, extraction and
/// Newton; then random directions; then the projected flow from the
/// threshold datum t_low d of the first direction. Throws SearchError with the
/// log if every stage fails.
SearchResult find_nodal(const WkBasis& basis, std::span<const double> direction, const SearchOptions& options = {});

/// Seeded direction uniformly distributed on the unit sphere of R^k.
std::vector<double> random_direction(int k, unsigned long long seed, int index);

}  // namespace sps
