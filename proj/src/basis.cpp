#include "sps/basis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sps/energy.hpp"
#include "sps/error.hpp"

namespace sps {

namespace {

double profile(double s) {
  if (std::abs(s) >= 1.0 - 1e-12) return 0.0;
  const double b = 1.0 - s * s;
  return b * b * b;
}

struct Support {
  double lo;
  double hi;
};

Support support_of(int i, int k, double width_factor) {
  const double kk = static_cast<double>(k);
  if (i == 0) return {0.0, width_factor / kk};
  const double mid = (static_cast<double>(i) + 0.5) / kk;
  const double half = 0.5 * width_factor / kk;
  return {mid - half, mid + half};
}

// The support is shrunk to grid nodes so that bumps of adjacent annuli never
// share a cell: the discrete H^1 cross terms then vanish exactly.
RadialField raw_bump(const GridPtr& grid, int i, int k, double width_factor) {
  const Support s = support_of(i, k, width_factor);
  const double h = grid->spacing();
  const double lo = i == 0 ? 0.0 : std::ceil(s.lo / h - 1e-9) * h;
  const double hi = std::floor(s.hi / h + 1e-9) * h;
  if (i == 0) {
    return RadialField::sample(grid, [&](double r) { return profile(r / hi); });
  }
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  return RadialField::sample(grid, [&](double r) { return profile((r - mid) / half); });
}

struct Family {
  std::vector<RadialField> bumps;
  std::vector<double> norms_sq;
  double m_max;
  double m_min;
};

Family build_family(const GridPtr& grid, int k, double q, double width_factor, int min_nodes) {
  Family f;
  for (int i = 0; i < k; ++i) {
    const Support s = support_of(i, k, width_factor);
    int inside = 0;
    for (double r : grid->nodes()) inside += (r > s.lo && r < s.hi) ? 1 : 0;
    if (inside < min_nodes) {
      std::ostringstream msg;
      msg << "grid under-resolves bump " << i + 1 << " of " << k << ": " << inside
          << " nodes inside its support, need " << min_nodes;
      throw ConfigError(msg.str());
    }
    RadialField w = rescale_to_nehari(raw_bump(grid, i, k, width_factor), q);
    f.norms_sq.push_back(h1_norm_sq(w));
    f.bumps.push_back(std::move(w));
  }
  f.m_max = *std::max_element(f.norms_sq.begin(), f.norms_sq.end());
  f.m_min = *std::min_element(f.norms_sq.begin(), f.norms_sq.end());
  return f;
}

}  // namespace

RadialField rescale_to_nehari(const RadialField& w, double q) {
  validate_exponent(q);
  const double h1 = h1_norm_sq(w);
  const double lq = lp_integral(w, q + 1.0);
  if (!(lq > 0.0) || !(h1 > 0.0)) throw ConfigError("cannot rescale the zero function");
  const double t = std::pow(h1 / lq, 1.0 / (q - 1.0));
  return t * w;
}

WkBasis build_basis(int k, double q, GridPtr grid, const BasisOptions& options) {
  if (k < 2) throw ConfigError("number of bumps k must be at least 2");
  validate_exponent(q);
  if (grid->radius() < 1.0) throw ConfigError("bumps need R >= 1");

  double width = 1.0;
  Family fam = build_family(grid, k, q, width, options.min_nodes_per_bump);
  const double bound = 1.0 / static_cast<double>(k);
  bool met = q != 3.0 || fam.m_max < bound;

  if (q == 3.0 && options.enforce_q3_constraint && !met) {
    // Nehari scaling fixes the amplitude, so only the support width can move M_k.
    double step = options.width_factor_step;
    for (int attempt = 0; attempt < options.max_width_retries && !met; ++attempt) {
      const double trial = width * step;
      if (trial > 1.0) {
        std::ostringstream msg;
        msg << "q = 3 requires M_k < 1/k = " << bound << ", but M_k = " << fam.m_max
            << " at full support width and narrowing does not decrease it";
        throw NumericalError(msg.str());
      }
      Family next = build_family(grid, k, q, trial, options.min_nodes_per_bump);
      if (next.m_max < fam.m_max) {
        width = trial;
        fam = std::move(next);
        met = fam.m_max < bound;
      } else if (step < 1.0) {
        step = 1.0 / step;  // wrong direction, widen instead
      } else {
        std::ostringstream msg;
        msg << "q = 3 constraint M_k < 1/k: no progress at width factor " << width
            << " (M_k = " << fam.m_max << ")";
        throw NumericalError(msg.str());
      }
    }
    if (!met) {
      std::ostringstream msg;
      msg << "q = 3 constraint M_k < 1/k not met within " << options.max_width_retries
          << " retries (M_k = " << fam.m_max << ")";
      throw NumericalError(msg.str());
    }
  }

  WkBasis b;
  b.k = k;
  b.q = q;
  b.bumps = std::move(fam.bumps);
  b.norms_sq = std::move(fam.norms_sq);
  b.m_max = fam.m_max;
  b.m_min = fam.m_min;
  b.width_factor = width;
  b.q3_constraint_met = q == 3.0 && met;
  return b;
}

RadialField combine(const WkBasis& basis, std::span<const double> t) {
  if (static_cast<int>(t.size()) != basis.k) {
    throw ConfigError("coefficient vector length does not match k");
  }
  RadialField out = RadialField::zeros(basis.bumps.front().grid_ptr());
  for (int j = 0; j < basis.k; ++j) {
    if (t[j] != 0.0) out += t[j] * basis.bumps[j];
  }
  return out;
}

WkBasis transfer(const WkBasis& basis, GridPtr grid) {
  const RadialGrid& from = basis.bumps.front().grid();
  if (std::abs(from.spacing() - grid->spacing()) > 1e-12 * from.spacing()) {
    throw ConfigError("basis transfer needs grids with identical spacing");
  }
  WkBasis out = basis;
  out.bumps.clear();
  for (const RadialField& w : basis.bumps) {
    std::vector<double> v(static_cast<std::size_t>(grid->size()), 0.0);
    const int common = std::min(grid->size(), w.size());
    for (int i = 0; i < common; ++i) v[i] = w[i];
    out.bumps.emplace_back(grid, std::move(v));
  }
  return out;
}

std::vector<double> alternating_direction(int k) {
  std::vector<double> d(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) d[j] = (j % 2 == 0) ? 1.0 : -1.0;
  return d;
}

}  // namespace sps
