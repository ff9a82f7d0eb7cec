#ifndef ROBUSTDP_SOLVER_HPP
#define ROBUSTDP_SOLVER_HPP

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "robustdp/integrand.hpp"
#include "robustdp/lattice.hpp"

namespace robustdp {

/// All feasible action prefixes, level by level. Level t holds the prefixes
/// of length t; the children of a level-t entry are contiguous at level t+1,
/// in tie-break order of their last action.
class PrefixTree {
 public:
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  explicit PrefixTree(const Integrand& psi, std::uint64_t max_entries = 1u << 24);

  std::size_t levels() const noexcept { return levels_.size(); }  // T + 1
  std::size_t size(std::size_t t) const { return levels_.at(t).parent.size(); }
  std::size_t dim() const noexcept { return dim_; }

  std::size_t parent(std::size_t t, std::size_t p) const { return levels_[t].parent[p]; }
  std::size_t first_child(std::size_t t, std::size_t p) const { return levels_[t].first_child[p]; }
  std::size_t child_count(std::size_t t, std::size_t p) const { return levels_[t].child_count[p]; }
  // last action of the level-t entry p (t >= 1)
  std::span<const double> action(std::size_t t, std::size_t p) const {
    return {levels_[t].actions.data() + p * dim_, dim_};
  }
  // the whole prefix, t*d entries
  std::vector<double> prefix(std::size_t t, std::size_t p) const;
  // npos when the prefix is not in the domain
  std::size_t find(std::span<const double> prefix) const;

 private:
  struct Level {
    std::vector<std::size_t> parent, first_child, child_count;
    std::vector<double> actions;
  };
  std::size_t dim_;
  std::vector<Level> levels_;
};

struct SolveOptions {
  unsigned workers = 1;
  double tolerance = 1e-9;
  std::uint64_t max_cells = std::uint64_t{1} << 26;
};

/// Psi_t on (node, prefix) and Phi_t on (node, prefix + action) cells.
class ValueField {
 public:
  ValueField(PrefixTree prefixes, const ScenarioTree& tree);

  const PrefixTree& prefixes() const noexcept { return prefixes_; }
  std::size_t horizon() const noexcept { return psi_.size() - 1; }

  XReal psi(std::size_t t, std::size_t node, std::size_t p) const { return psi_[t][node * prefixes_.size(t) + p]; }
  // Phi_t at node for the level-(t+1) prefix q
  XReal phi(std::size_t t, std::size_t node, std::size_t q) const {
    return phi_[t][node * prefixes_.size(t + 1) + q];
  }
  // NEG_INF for prefixes outside the domain
  XReal psi_at(std::size_t t, std::size_t node, std::span<const double> prefix) const;
  XReal root() const { return psi_[0][0]; }

  const std::vector<XReal>& psi_level(std::size_t t) const { return psi_.at(t); }
  const std::vector<XReal>& phi_level(std::size_t t) const { return phi_.at(t); }
  std::vector<XReal>& psi_level(std::size_t t) { return psi_.at(t); }
  std::vector<XReal>& phi_level(std::size_t t) { return phi_.at(t); }

 private:
  PrefixTree prefixes_;
  std::vector<std::vector<XReal>> psi_;  // t = 0..T
  std::vector<std::vector<XReal>> phi_;  // t = 0..T-1
};

/// Robust backward induction:
///   Psi_T = Psi,  Phi_t = min over the node's kernel list of E[Psi_{t+1}],
///   Psi_t = max over feasible actions of Phi_t.
/// Throws InfeasibleProblem when Psi_0 is NEG_INF.
ValueField backward_induct(const ScenarioTree& tree, const AmbiguityKernel& kernel, const Integrand& psi,
                           const SolveOptions& opts = {});

/// Chosen level-(t+1) prefix for each (node, level-t prefix). Keeps a
/// reference to the ValueField's prefix tree.
class PolicyTable {
 public:
  PolicyTable(const ValueField& values, const ScenarioTree& tree, double tolerance = 1e-9);

  XReal root_value() const noexcept { return root_; }
  std::size_t choice(std::size_t t, std::size_t node, std::size_t p) const {
    return choice_[t][node * size_[t] + p];
  }
  std::span<const double> action(std::size_t t, std::size_t node, std::size_t p) const;

  // the strategy obtained by following the policy from the root
  const AdaptedStrategy& realized() const noexcept { return realized_; }
  // level-t prefix reached at each depth-t node under realized()
  const std::vector<std::size_t>& reached(std::size_t t) const { return reached_.at(t); }

 private:
  const PrefixTree* prefixes_;
  XReal root_;
  std::vector<std::size_t> size_;
  std::vector<std::vector<std::size_t>> choice_;
  std::vector<std::vector<std::size_t>> reached_;
  AdaptedStrategy realized_;
};

PolicyTable extract_policy(const ValueField& values, const ScenarioTree& tree, double tolerance = 1e-9);

struct PolicyEvaluation {
  XReal pinned;                     // backward inf recursion with actions pinned
  std::optional<XReal> enumerated;  // explicit min over selections, when affordable
  std::uint64_t selections = 0;
};

/// inf_P E^P[Psi(H)] for the realised policy, two ways. Throws
/// ConsistencyError when they differ by more than `tolerance`.
PolicyEvaluation evaluate_policy(const ScenarioTree& tree, const AmbiguityKernel& kernel, const Integrand& psi,
                                 const AdaptedStrategy& h, std::uint64_t max_selections = 1000000,
                                 double tolerance = 1e-9);

// value process of a fixed strategy: inf-only recursion, one value per node (global ids)
std::vector<XReal> pinned_value_process(const ScenarioTree& tree, const AmbiguityKernel& kernel, const Integrand& psi,
                                        const AdaptedStrategy& h);

}  // namespace robustdp

#endif
