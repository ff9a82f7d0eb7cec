#ifndef ROBUSTDP_DETAIL_RANDOM_STRATEGY_HPP
#define ROBUSTDP_DETAIL_RANDOM_STRATEGY_HPP

#include <random>
#include <stdexcept>

namespace robustdp {

template <class Rng>
AdaptedStrategy random_adapted_strategy(const Integrand& psi, Rng& rng) {
  const auto& tree = psi.tree();
  const std::size_t d = psi.action_dim();
  AdaptedStrategy h{d, std::vector<double>(tree.internal_count() * d, 0.0)};
  for (std::size_t t = 0; t < tree.horizon(); ++t) {
    for (std::size_t i = 0; i < tree.nodes_at(t); ++i) {
      std::vector<double> prefix;
      prefix.reserve(t * d);
      for (std::size_t s = 0; s < t; ++s) {
        auto a = h.at(tree.id(s, tree.ancestor(t, i, s)));
        prefix.insert(prefix.end(), a.begin(), a.end());
      }
      auto acts = psi.feasible_actions(t, prefix);
      if (acts.empty()) throw std::logic_error("random_adapted_strategy: dead-end prefix");
      std::uniform_int_distribution<std::size_t> pick(0, acts.size() - 1);
      const auto& a = acts[pick(rng)];
      std::copy(a.begin(), a.end(), h.at(tree.id(t, i)).begin());
    }
  }
  return h;
}

}  // namespace robustdp

#endif
