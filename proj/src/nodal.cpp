#include "sps/nodal.hpp"

#include <cmath>

#include "sps/error.hpp"

namespace sps {

NodalProfile sign_changes(const RadialField& u, std::optional<double> eps) {
  const double threshold = eps.value_or(kDefaultRelativeZero * u.sup_norm());
  if (!(threshold >= 0.0)) throw ConfigError("zero threshold must be nonnegative");

  NodalProfile out;
  const RadialGrid& g = u.grid();
  int last_index = -1;
  int last_sign = 0;
  for (int i = 0; i + 1 < u.size(); ++i) {
    const double v = u[i];
    const int s = v > threshold ? 1 : (v < -threshold ? -1 : 0);
    if (s == 0) continue;
    if (last_sign != 0 && s != last_sign) {
      const double ra = g.node(last_index);
      const double rb = g.node(i);
      const double ua = u[last_index];
      const double rc = ra + (rb - ra) * ua / (ua - v);
      out.crossings.push_back(rc);
      ++out.count;
    }
    last_sign = s;
    last_index = i;
  }
  out.extrema = extrema_amplitudes(u);
  return out;
}

std::vector<Extremum> extrema_amplitudes(const RadialField& u) {
  std::vector<Extremum> out;
  const RadialGrid& g = u.grid();
  const int n = u.size();
  for (int i = 0; i + 1 < n; ++i) {
    const double left = i == 0 ? u[1] : u[i - 1];
    const double here = u[i];
    const double right = u[i + 1];
    const bool max = here > 0.0 && here >= left && here > right;
    const bool min = here < 0.0 && here <= left && here < right;
    if (max || min) out.push_back({g.node(i), here});
  }
  return out;
}

}  // namespace sps
