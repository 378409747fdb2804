#include "sps/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>

#include "sps/error.hpp"

namespace sps {

namespace {

int nodes_for(double radius, double density) {
  const double cells = radius * density;
  const long rounded = std::lround(cells);
  if (std::abs(cells - static_cast<double>(rounded)) > 1e-9 * cells) {
    throw ConfigError("radius * density must be an integer so that h is shared by all radii");
  }
  return static_cast<int>(rounded) + 1;
}

RadialField zero_extend(const RadialField& u, const GridPtr& grid) {
  std::vector<double> v(static_cast<std::size_t>(grid->size()), 0.0);
  const int common = std::min(u.size(), grid->size());
  for (int i = 0; i < common; ++i) v[i] = u[i];
  return RadialField(grid, std::move(v)).with_zero_trace();
}

SweepEntry solve_one(const WkBasis& shared, double radius, const SweepOptions& options,
                     const RadialField* warm) {
  SweepEntry entry;
  entry.radius = radius;
  try {
    const GridPtr grid = build_uniform(radius, nodes_for(radius, options.density));
    const WkBasis basis = transfer(shared, grid);
    if (warm) {
      try {
        EquilibriumCandidate c = refine_to_tolerance(zero_extend(*warm, grid), basis.q, options.search.extract.newton);
        c.k = basis.k;
        if (!rejection_reason(c, basis.k, options.search.limits)) {
          SearchResult res(std::move(c));
          res.route = SearchRoute::WarmStart;
          res.log.push_back({"warm start", "accepted"});
          entry.result = std::move(res);
          return entry;
        }
      } catch (const SearchError&) {
        // fall through to the cold search
      }
    }
    const auto d = alternating_direction(basis.k);
    entry.result = find_nodal(basis, d, options.search);
  } catch (const std::exception& e) {
    entry.error = e.what();
  }
  return entry;
}

}  // namespace

SweepReport run_sweep(int k, double q, const std::vector<double>& radii, const SweepOptions& options) {
  if (radii.empty()) throw ConfigError("sweep needs at least one radius");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] >= 1.0)) throw ConfigError("sweep radii must be >= 1");
    if (i > 0 && !(radii[i] > radii[i - 1])) throw ConfigError("sweep radii must be strictly increasing");
  }
  if (!(options.density > 0.0)) throw ConfigError("grid density must be positive");
  if (options.jobs < 1) throw ConfigError("jobs must be >= 1");

  const GridPtr first = build_uniform(radii.front(), nodes_for(radii.front(), options.density));
  const WkBasis shared = build_basis(k, q, first);

  SweepReport rep;
  rep.k = k;
  rep.q = q;
  rep.density = options.density;
  rep.radii = radii;
  rep.basis = shared;
  rep.m_k = shared.m_max;
  rep.c_k = energy_upper_bound(k, shared.m_max, q);
  rep.entries.resize(radii.size());

  if (options.warm_start) {
    std::optional<RadialField> warm;
    for (std::size_t i = 0; i < radii.size(); ++i) {
      rep.entries[i] = solve_one(shared, radii[i], options, warm ? &*warm : nullptr);
      if (rep.entries[i].result) warm = rep.entries[i].result->candidate.u;
    }
  } else {
    for (std::size_t start = 0; start < radii.size(); start += static_cast<std::size_t>(options.jobs)) {
      std::vector<std::future<SweepEntry>> batch;
      const std::size_t stop = std::min(radii.size(), start + static_cast<std::size_t>(options.jobs));
      for (std::size_t i = start; i < stop; ++i) {
        batch.push_back(std::async(std::launch::async, [&, i] { return solve_one(shared, radii[i], options, nullptr); }));
      }
      for (std::size_t i = start; i < stop; ++i) rep.entries[i] = batch[i - start].get();
    }
  }

  rep.all_accepted = std::all_of(rep.entries.begin(), rep.entries.end(), [](const SweepEntry& e) { return e.result.has_value(); });
  rep.energy_bound = rep.all_accepted;
  rep.h1_bound = rep.all_accepted;
  for (const SweepEntry& e : rep.entries) {
    if (!e.result) continue;
    const EquilibriumCandidate& c = e.result->candidate;
    rep.energy_bound = rep.energy_bound && c.energy.total <= rep.c_k;
    rep.h1_bound = rep.h1_bound && h1_norm_sq(c.u) <= 4.0 * rep.c_k;
    const auto& x = c.nodal.crossings;
    rep.outer_crossings.push_back(x.empty() ? std::numeric_limits<double>::quiet_NaN() : x.back());
    rep.strauss.push_back(strauss_envelope(c.u));
  }

  rep.probe_radius = std::min(options.probe_radius, radii.front());
  rep.distances = profile_convergence(rep, rep.probe_radius);

  if (!rep.outer_crossings.empty()) {
    const auto [lo, hi] = std::minmax_element(rep.outer_crossings.begin(), rep.outer_crossings.end());
    rep.crossings_agree = rep.all_accepted && std::isfinite(*lo) && *lo > 0.0 && *hi / *lo - 1.0 <= options.crossing_tolerance;
  }
  return rep;
}

double profile_distance(const RadialField& u, const RadialField& v, double rho) {
  double m = 0.0;
  for (int i = 0; i < u.size(); ++i) {
    const double r = u.grid().node(i);
    if (r > rho) break;
    m = std::max(m, std::abs(u[i] - interpolate(v, r)));
  }
  return m;
}

std::vector<double> profile_convergence(const SweepReport& report, double rho) {
  std::vector<const RadialField*> fields;
  for (const SweepEntry& e : report.entries) {
    if (e.result) fields.push_back(&e.result->candidate.u);
  }
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < fields.size(); ++i) out.push_back(profile_distance(*fields[i], *fields[i + 1], rho));
  return out;
}

double strauss_envelope(const RadialField& u) {
  const double norm = std::sqrt(h1_norm_sq(u));
  if (!(norm > 0.0)) return 0.0;
  double m = 0.0;
  for (int i = 0; i < u.size(); ++i) {
    const double r = u.grid().node(i);
    if (r >= 1.0) m = std::max(m, std::abs(u[i]) * r);
  }
  return m / norm;
}

}  // namespace sps
