// Plain single-prior dynamic programming, written without the solver's
// prefix tree or extended-real helpers.
#ifndef ROBUSTDP_TESTS_CLASSICAL_DP_HPP
#define ROBUSTDP_TESTS_CLASSICAL_DP_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "robustdp/integrand.hpp"
#include "robustdp/lattice.hpp"

namespace testkit {

// sup_x E^P[Psi(x)] for the single law P given by the first vector at each node
inline double classical_value(const robustdp::Integrand& psi, const robustdp::AmbiguityKernel& kernel,
                              std::size_t t = 0, std::size_t node = 0, std::vector<double> prefix = {}) {
  const auto& tree = psi.tree();
  const double ninf = -std::numeric_limits<double>::infinity();
  if (t == tree.horizon()) return psi.evaluate(node, prefix).value();
  const auto& p = kernel.at(t, node)[0];
  double best = ninf;
  for (const auto& a : psi.feasible_actions(t, prefix)) {
    auto next = prefix;
    next.insert(next.end(), a.begin(), a.end());
    double e = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
      if (p[k] == 0.0) continue;
      const double v = classical_value(psi, kernel, t + 1, node * p.size() + k, next);
      if (v == ninf) {
        e = ninf;
        break;
      }
      e += p[k] * v;
    }
    best = std::max(best, e);
  }
  return best;
}

}  // namespace testkit

#endif
