#include "sps/search.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "sps/error.hpp"
#include "sps/poisson.hpp"

namespace sps {

std::string to_string(SearchFailure kind) {
  switch (kind) {
    case SearchFailure::SeedBracketFailed: return "SeedBracketFailed";
    case SearchFailure::NoStagnationFound: return "NoStagnationFound";
    case SearchFailure::NewtonDiverged: return "NewtonDiverged";
    case SearchFailure::NodalCountMismatch: return "NodalCountMismatch";
  }
  return "unknown";
}

namespace {

double inf_norm(const RadialField& g) {
  double m = 0.0;
  for (double x : g.values()) m = std::max(m, std::abs(x));
  return m;
}

// Unknowns per node i: (delta_i, P_i, S_i) at 3i, 3i+1, 3i+2, where
// phi'_i = a_i P_i + S_i is the kernel applied to the density u delta.
Eigen::VectorXd newton_direction(const RadialField& u, const Potential& phi, const RadialField& g, double q) {
  const RadialGrid& grid = u.grid();
  const int n = grid.size();
  const auto w = grid.weights();
  const auto c = grid.conductances();
  const auto r = grid.nodes();
  const double inv4pi = 0.25 / std::numbers::pi;

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(12 * n));
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(3 * n);

  for (int i = 0; i < n; ++i) {
    const int d = 3 * i;
    const int p = d + 1;
    const int s = d + 2;

    if (i + 1 < n) {
      const double left = i > 0 ? c[i - 1] / w[i] : 0.0;
      const double right = c[i] / w[i];
      const double ui = u[i];
      const double a = i > 0 ? 1.0 / r[i] : 5.0 / grid.spacing();
      trip.emplace_back(d, d, left + right + 1.0 + phi[i] - q * std::pow(std::abs(ui), q - 1.0));
      if (i > 0) trip.emplace_back(d, d - 3, -left);
      trip.emplace_back(d, d + 3, -right);
      trip.emplace_back(d, p, 2.0 * ui * a);
      trip.emplace_back(d, s, 2.0 * ui);
      rhs(d) = -g[i];
    } else {
      trip.emplace_back(d, d, 1.0);
    }

    trip.emplace_back(p, p, 1.0);
    if (i > 0) trip.emplace_back(p, p - 3, -1.0);
    trip.emplace_back(p, d, -w[i] * inv4pi * u[i]);

    trip.emplace_back(s, s, 1.0);
    if (i + 1 < n) {
      trip.emplace_back(s, s + 3, -1.0);
      trip.emplace_back(s, d + 3, -w[i + 1] * inv4pi / r[i + 1] * u[i + 1]);
    }
  }

  Eigen::SparseMatrix<double> mat(3 * n, 3 * n);
  mat.setFromTriplets(trip.begin(), trip.end());
  mat.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(mat);
  if (lu.info() != Eigen::Success) throw NumericalError("Newton: singular Jacobian");
  Eigen::VectorXd sol = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !sol.allFinite()) throw NumericalError("Newton: linear solve failed");
  return sol;
}

}  // namespace

RadialField jacobian_action(const RadialField& u, double q, const RadialField& v) {
  validate_exponent(q);
  if (!u.same_grid(v)) throw ConfigError("jacobian_action: fields live on different grids");
  const int n = u.size();
  const Potential phi = potential(u);
  std::vector<double> uv(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) uv[i] = u[i] * v[i];
  const auto kuv = apply_kernel(u.grid(), uv);
  auto out = laplacian(u.grid(), v.values());
  for (int i = 0; i + 1 < n; ++i) {
    out[i] = -out[i] + v[i] + phi[i] * v[i] + 2.0 * u[i] * kuv[i] - q * std::pow(std::abs(u[i]), q - 1.0) * v[i];
  }
  out[n - 1] = 0.0;
  return RadialField(u.grid_ptr(), std::move(out));
}

double residual_tolerance(const RadialField& u, double margin) { return margin * 1e-8 * (1.0 + u.sup_norm()); }

void certify(EquilibriumCandidate& c, double q) {
  const Potential phi = potential(c.u);
  const RadialField g = gradient(c.u, phi, q);
  c.q = q;
  c.radius = c.u.grid().radius();
  c.residual_inf = inf_norm(g);
  c.residual_l2 = l2_norm(g);
  c.energy = energy(c.u, phi, q);
  c.nodal = sign_changes(c.u);
  c.nehari = nehari_value(c.u, q);
}

EquilibriumCandidate refine_newton(const RadialField& u0, double q, double tol, const NewtonOptions& options) {
  validate_exponent(q);
  if (!(tol > 0.0)) throw ConfigError("Newton tolerance must be positive");

  RadialField u = u0.with_zero_trace();
  Potential phi = potential(u);
  RadialField g = gradient(u, phi, q);
  double res = inf_norm(g);
  std::vector<double> history{res};
  int iterations = 0;

  while (res > tol) {
    if (iterations >= options.max_iterations) {
      std::ostringstream msg;
      msg << "no convergence in " << options.max_iterations << " iterations (residual " << res << ")";
      throw SearchError(SearchFailure::NewtonDiverged, msg.str());
    }
    Eigen::VectorXd sol;
    try {
      sol = newton_direction(u, phi, g, q);
    } catch (const NumericalError& e) {
      throw SearchError(SearchFailure::NewtonDiverged, e.what());
    }
    std::vector<double> delta(static_cast<std::size_t>(u.size()));
    for (int i = 0; i < u.size(); ++i) delta[i] = sol(3 * i);
    const RadialField step(u.grid_ptr(), std::move(delta));

    double lambda = 1.0;
    bool accepted = false;
    for (int attempt = 0; attempt <= options.max_halvings; ++attempt) {
      RadialField trial = (u + lambda * step).with_zero_trace();
      Potential trial_phi = potential(trial);
      RadialField trial_g = gradient(trial, trial_phi, q);
      const double trial_res = inf_norm(trial_g);
      if (std::isfinite(trial_res) && trial_res < res) {
        u = std::move(trial);
        phi = std::move(trial_phi);
        g = std::move(trial_g);
        res = trial_res;
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    ++iterations;
    if (!accepted) {
      std::ostringstream msg;
      msg << "residual did not decrease after " << options.max_halvings << " halvings (residual " << res
          << ", iteration " << iterations << ")";
      throw SearchError(SearchFailure::NewtonDiverged, msg.str());
    }
    history.push_back(res);
  }

  EquilibriumCandidate c(u);
  c.newton_iterations = iterations;
  c.residual_history = std::move(history);
  certify(c, q);
  return c;
}

std::optional<std::string> rejection_reason(const EquilibriumCandidate& c, int k, const AcceptanceLimits& limits) {
  std::ostringstream msg;
  const double sup = c.u.sup_norm();
  if (!(c.residual_inf <= limits.residual_rel * (1.0 + sup))) {
    msg << "residual " << c.residual_inf << " above " << limits.residual_rel * (1.0 + sup);
    return msg.str();
  }
  if (c.nodal.count != k - 1) {
    msg << "nodal count " << c.nodal.count << ", expected " << k - 1;
    return msg.str();
  }
  const double norm_sq = h1_norm_sq(c.u);
  if (!(std::abs(c.nehari) <= limits.nehari_rel * norm_sq)) {
    msg << "Nehari value " << c.nehari << " above " << limits.nehari_rel * norm_sq;
    return msg.str();
  }
  for (const Extremum& e : c.nodal.extrema) {
    if (!(std::abs(e.value) >= limits.amplitude_min)) {
      msg << "extremum amplitude " << std::abs(e.value) << " at r = " << e.radius << " below " << limits.amplitude_min;
      return msg.str();
    }
  }
  return std::nullopt;
}

Verdict classify(double t, std::span<const double> d, const WkBasis& basis, const FlowConfig& cfg) {
  if (!(t >= 0.0)) throw ConfigError("amplitude must be nonnegative");
  std::vector<double> coeff(d.begin(), d.end());
  for (double& x : coeff) x *= t;
  return integrate(combine(basis, coeff), basis.q, cfg).verdict;
}

ThresholdBracket bisect_threshold(const ProbeClassifier& probe, std::vector<double> direction,
                                  const BisectOptions& options) {
  if (!(options.seed_low >= 0.0) || !(options.seed_high > options.seed_low)) {
    throw ConfigError("bisection seeds must satisfy 0 <= low < high");
  }
  if (!(options.tol > 0.0)) throw ConfigError("bisection tolerance must be positive");

  ThresholdBracket b;
  b.direction = std::move(direction);
  auto run = [&](double t) {
    Probe p = probe(t);
    p.t = t;
    b.probes.push_back(p);
    return p.verdict == Verdict::DecaysToZero;
  };

  if (!run(options.seed_low)) {
    std::ostringstream msg;
    msg << "low seed t = " << options.seed_low << " does not decay";
    throw SearchError(SearchFailure::SeedBracketFailed, msg.str());
  }
  double lo = options.seed_low;
  double hi = options.seed_high;
  int doublings = 0;
  while (run(hi)) {
    lo = hi;
    if (doublings++ >= options.max_doublings) {
      std::ostringstream msg;
      msg << "t = " << hi << " still decays after " << options.max_doublings << " doublings";
      throw SearchError(SearchFailure::SeedBracketFailed, msg.str());
    }
    hi *= 2.0;
  }
  while (hi - lo > options.tol * hi && static_cast<int>(b.probes.size()) < options.max_probes) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // bracket at machine resolution
    (run(mid) ? lo : hi) = mid;
  }
  b.t_low = lo;
  b.t_high = hi;
  return b;
}

ThresholdBracket bisect_threshold(std::span<const double> d, const WkBasis& basis, const FlowConfig& cfg,
                                  double tol) {
  FlowConfig quiet = cfg;
  quiet.keep_profiles = false;
  std::vector<double> dir(d.begin(), d.end());
  BisectOptions opts;
  opts.tol = tol;
  return bisect_threshold(
      [&](double t) {
        std::vector<double> coeff = dir;
        for (double& x : coeff) x *= t;
        const FlowTrajectory tr = integrate(combine(basis, coeff), basis.q, quiet);
        Probe p;
        p.verdict = tr.verdict;
        p.t_end = tr.steps.empty() ? 0.0 : tr.steps.back().t;
        p.nodal_end = sign_changes(tr.final_state).count;
        p.nodal_monotone = tr.nodal_monotonicity_violation() < 0;
        return p;
      },
      dir, opts);
}

EquilibriumCandidate refine_to_tolerance(const RadialField& u, double q, const NewtonOptions& options) {
  EquilibriumCandidate c = refine_newton(u, q, residual_tolerance(u), options);
  for (int pass = 0; pass < 3 && c.residual_inf > residual_tolerance(c.u); ++pass) {
    EquilibriumCandidate next = refine_newton(c.u, q, residual_tolerance(c.u), options);
    next.newton_iterations += c.newton_iterations;
    c.residual_history.insert(c.residual_history.end(), next.residual_history.begin() + 1,
                              next.residual_history.end());
    next.residual_history = std::move(c.residual_history);
    c = std::move(next);
  }
  return c;
}

namespace {

std::string describe(std::span<const double> d) {
  std::ostringstream out;
  out << "(";
  for (std::size_t i = 0; i < d.size(); ++i) out << (i ? "," : "") << d[i];
  out << ")";
  return out.str();
}

}  // namespace

EquilibriumCandidate extract_candidate(const ThresholdBracket& bracket, int k, double q,
                                       const TrajectoryRunner& runner, const ExtractOptions& options,
                                       std::vector<FlowTrajectory>* archive) {
  if (!(bracket.t_low < bracket.t_high)) throw ConfigError("extract_candidate: invalid bracket");
  SearchFailure last = SearchFailure::NoStagnationFound;
  std::string last_msg = "no attempt";
  const double width = bracket.width();

  for (int j = 0; j <= options.max_retries; ++j) {
    const double t = bracket.t_high - width * std::ldexp(1.0, -(j + 1));
    std::ostringstream at;
    at << "t = " << t << ": ";
    std::optional<Snapshot> harvest;
    try {
      FlowTrajectory tr = runner(t);
      harvest = tr.harvest;
      if (archive) archive->push_back(std::move(tr));
    } catch (const NumericalError& e) {
      last = SearchFailure::NoStagnationFound;
      last_msg = at.str() + e.what();
      continue;
    }
    if (!harvest || !harvest->field || harvest->nodal_count != k - 1) {
      last = SearchFailure::NoStagnationFound;
      last_msg = at.str() + "no harvestable state with " + std::to_string(k - 1) + " sign changes";
      continue;
    }
    try {
      EquilibriumCandidate c = refine_to_tolerance(*harvest->field, q, options.newton);
      c.k = k;
      if (c.nodal.count != k - 1) {
        last = SearchFailure::NodalCountMismatch;
        last_msg = at.str() + "Newton converged to " + std::to_string(c.nodal.count) + " sign changes";
        continue;
      }
      if (auto why = rejection_reason(c, k)) {
        last = SearchFailure::NoStagnationFound;
        last_msg = at.str() + *why;
        continue;
      }
      return c;
    } catch (const SearchError& e) {
      last = e.kind();
      last_msg = at.str() + e.what();
    }
  }
  throw SearchError(last, last_msg);
}

EquilibriumCandidate extract_candidate(const ThresholdBracket& bracket, const WkBasis& basis, const FlowConfig& cfg,
                                       const ExtractOptions& options, std::vector<FlowTrajectory>* archive) {
  FlowConfig run_cfg = cfg;
  run_cfg.t_max = cfg.t_max * options.horizon_factor;
  run_cfg.harvest_nodal_count = basis.k - 1;
  run_cfg.harvest_floor = options.harvest_floor;
  run_cfg.keep_profiles = false;
  const std::vector<double> d = bracket.direction;
  return extract_candidate(
      bracket, basis.k, basis.q,
      [&](double t) {
        std::vector<double> coeff = d;
        for (double& x : coeff) x *= t;
        return integrate(combine(basis, coeff), basis.q, run_cfg);
      },
      options, archive);
}

int innermost_domain_nodes(const RadialField& u) {
  const NodalProfile p = sign_changes(u);
  const double edge = p.crossings.empty() ? u.grid().radius() : p.crossings.front();
  int count = 0;
  for (double r : u.grid().nodes()) count += r < edge ? 1 : 0;
  return count;
}

std::string to_string(SearchRoute route) {
  switch (route) {
    case SearchRoute::Threshold: return "threshold";
    case SearchRoute::ProjectedFlow: return "projected-flow";
    case SearchRoute::WarmStart: return "warm-start";
  }
  return "unknown";
}

std::vector<double> random_direction(int k, unsigned long long seed, int index) {
  if (k < 1) throw ConfigError("direction dimension must be positive");
  std::seed_seq seq{static_cast<unsigned>(seed & 0xffffffffu), static_cast<unsigned>(seed >> 32),
                    static_cast<unsigned>(index)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal;
  std::vector<double> d(static_cast<std::size_t>(k));
  double norm = 0.0;
  while (!(norm > 0.0)) {
    norm = 0.0;
    for (double& x : d) {
      x = normal(rng);
      norm += x * x;
    }
  }
  for (double& x : d) x /= std::sqrt(norm);
  return d;
}

SearchResult find_nodal(const WkBasis& basis, std::span<const double> direction, const SearchOptions& options) {
  const int k = basis.k;
  const double q = basis.q;
  if (static_cast<int>(direction.size()) != k) throw ConfigError("direction length does not match k");

  std::vector<SearchAttempt> log;
  int trajectories = 0;
  int violations = 0;
  SearchFailure last = SearchFailure::SeedBracketFailed;
  std::optional<ThresholdBracket> first_bracket;

  FlowConfig probe_cfg = options.flow;
  probe_cfg.keep_profiles = false;
  BisectOptions bopts;
  bopts.tol = options.bisect_tol;

  std::vector<std::vector<double>> directions{std::vector<double>(direction.begin(), direction.end())};
  for (int i = 0; i < options.fallback_directions; ++i) directions.push_back(random_direction(k, options.seed, i));

  for (const auto& d : directions) {
    const std::string stage = "threshold d=" + describe(d);
    ThresholdBracket br;
    try {
      br = bisect_threshold(
          [&](double t) {
            std::vector<double> coeff = d;
            for (double& x : coeff) x *= t;
            const FlowTrajectory tr = integrate(combine(basis, coeff), q, probe_cfg);
            Probe p;
            p.verdict = tr.verdict;
            p.t_end = tr.steps.empty() ? 0.0 : tr.steps.back().t;
            p.nodal_end = sign_changes(tr.final_state).count;
            p.nodal_monotone = tr.nodal_monotonicity_violation() < 0;
            ++trajectories;
            violations += p.nodal_monotone ? 0 : 1;
            return p;
          },
          d, bopts);
    } catch (const SearchError& e) {
      last = e.kind();
      log.push_back({stage, e.what()});
      continue;
    } catch (const NumericalError& e) {
      last = SearchFailure::SeedBracketFailed;
      log.push_back({stage, e.what()});
      continue;
    }
    if (!first_bracket) first_bracket = br;

    std::vector<FlowTrajectory> archive;
    auto audit = [&] {
      for (const FlowTrajectory& tr : archive) {
        ++trajectories;
        violations += tr.nodal_monotonicity_violation() < 0 ? 0 : 1;
      }
    };
    try {
      EquilibriumCandidate c = extract_candidate(br, basis, options.flow, options.extract, &archive);
      audit();
      log.push_back({stage, "accepted"});
      SearchResult res(std::move(c));
      res.route = SearchRoute::Threshold;
      res.bracket = std::move(br);
      res.history = archive.back().steps;
      res.log = std::move(log);
      res.trajectories = trajectories;
      res.nodal_violations = violations;
      return res;
    } catch (const SearchError& e) {
      audit();
      last = e.kind();
      log.push_back({stage, e.what()});
    } catch (const NumericalError& e) {
      audit();
      last = SearchFailure::NoStagnationFound;
      log.push_back({stage, e.what()});
    }
  }

  if (options.projected_fallback) {
    const std::string stage = "projected flow";
    try {
      RadialField start = combine(basis, directions.front());
      if (static_cast<int>(nodal_components(start.with_zero_trace()).size()) != k) {
        std::vector<double> alt = alternating_direction(k);
        if (directions.front().front() < 0.0) {
          for (double& x : alt) x = -x;
        }
        start = combine(basis, alt);
      }
      ProjectedFlowResult pf = projected_flow(start, q, k, options.projection);
      ++trajectories;
      for (std::size_t i = 1; i < pf.history.size(); ++i) {
        if (pf.history[i].nodal_count > pf.history[i - 1].nodal_count) {
          ++violations;
          break;
        }
      }
      if (!pf.converged) {
        std::ostringstream msg;
        msg << "no stagnation after " << pf.steps << " steps (residual " << pf.residual_inf << ")";
        throw SearchError(SearchFailure::NoStagnationFound, msg.str());
      }
      EquilibriumCandidate c = refine_to_tolerance(pf.state, q, options.extract.newton);
      c.k = k;
      if (c.nodal.count != k - 1) {
        throw SearchError(SearchFailure::NodalCountMismatch,
                          "Newton converged to " + std::to_string(c.nodal.count) + " sign changes");
      }
      if (auto why = rejection_reason(c, k, options.limits)) {
        throw SearchError(SearchFailure::NoStagnationFound, *why);
      }
      log.push_back({stage, "accepted"});
      SearchResult res(std::move(c));
      res.route = SearchRoute::ProjectedFlow;
      if (first_bracket) res.bracket = std::move(*first_bracket);
      res.history = std::move(pf.history);
      res.log = std::move(log);
      res.trajectories = trajectories;
      res.nodal_violations = violations;
      return res;
    } catch (const SearchError& e) {
      last = e.kind();
      log.push_back({stage, e.what()});
    } catch (const std::exception& e) {
      last = SearchFailure::NoStagnationFound;
      log.push_back({stage, e.what()});
    }
  }

  std::ostringstream msg;
  msg << "all stages failed";
  for (const auto& a : log) msg << "; " << a.stage << ": " << a.outcome;
  throw SearchError(last, msg.str());
}

}  // namespace sps
