#pragma once

#include "sps/basis.hpp"
#include "sps/search.hpp"

namespace testing {

// Basis and accepted candidate for k = 2, q = 3.5, R = 5 at density 200,
// computed once per test binary.
inline const sps::WkBasis& basis_2_35_5() {
  static const sps::WkBasis b = sps::build_basis(2, 3.5, sps::build_uniform(5.0, 1001));
  return b;
}

inline const sps::SearchResult& candidate_2_35_5() {
  static const sps::SearchResult r = sps::find_nodal(basis_2_35_5(), sps::alternating_direction(2));
  return r;
}

}  // namespace testing
