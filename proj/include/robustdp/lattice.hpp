#ifndef ROBUSTDP_LATTICE_HPP
#define ROBUSTDP_LATTICE_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "robustdp/xreal.hpp"

namespace robustdp {

using Outcome = std::vector<double>;
using ProbVector = std::vector<double>;

/// Finite product lattice Omega^0 x ... x Omega^T.
///
/// Nodes at depth t are numbered 0..nodes_at(t)-1 lexicographically by the
/// outcome path leading to them; the children of node i at depth t are
/// i*b + k, k < b, where b is the number of outcomes of period t+1. Global
/// ids list depth 0 first, then depth 1, ..., so ids below
/// internal_count() are exactly the nodes that still have a decision.
class ScenarioTree {
 public:
  // stages[t] holds the outcomes of period t+1
  explicit ScenarioTree(std::vector<std::vector<Outcome>> stages);

  std::size_t horizon() const noexcept { return stages_.size(); }
  std::size_t branching(std::size_t t) const { return stages_.at(t).size(); }  // children of a depth-t node
  std::size_t nodes_at(std::size_t t) const { return level_size_.at(t); }
  std::size_t node_count() const noexcept { return offset_.back(); }
  std::size_t leaf_count() const noexcept { return level_size_.back(); }
  std::size_t internal_count() const noexcept { return offset_[horizon()]; }

  std::size_t id(std::size_t t, std::size_t index) const { return offset_.at(t) + index; }
  std::size_t depth_of(std::size_t id) const;
  std::size_t index_of(std::size_t id) const { return id - offset_[depth_of(id)]; }

  std::size_t child(std::size_t t, std::size_t index, std::size_t k) const { return index * branching(t) + k; }
  std::size_t parent(std::size_t t, std::size_t index) const { return index / branching(t - 1); }
  // index at depth `to` of the ancestor of node (t, index), to <= t
  std::size_t ancestor(std::size_t t, std::size_t index, std::size_t to) const;

  // outcome indices (one per period) of the path to (t, index)
  std::vector<std::size_t> path(std::size_t t, std::size_t index) const;
  std::size_t encode(std::span<const std::size_t> path) const;

  // outcome of the last period on the path to (t, index), t >= 1
  const Outcome& outcome(std::size_t t, std::size_t index) const {
    return stages_.at(t - 1)[index % branching(t - 1)];
  }
  const std::vector<std::vector<Outcome>>& stages() const noexcept { return stages_; }

 private:
  std::vector<std::vector<Outcome>> stages_;
  std::vector<std::size_t> level_size_;
  std::vector<std::size_t> offset_;  // offset_[t] = first global id at depth t; offset_[T+1] = node count
};

/// Per-node finite ambiguity sets: node (t, i), t < T, carries a nonempty list
/// of probability vectors over its children.
class AmbiguityKernel {
 public:
  static constexpr double kTolerance = 1e-12;

  // lists[t][i] is the list at node (t, i)
  AmbiguityKernel(const ScenarioTree& tree, std::vector<std::vector<std::vector<ProbVector>>> lists);
  // the same list at every node of a depth
  static AmbiguityKernel homogeneous(const ScenarioTree& tree, const std::vector<std::vector<ProbVector>>& per_depth);

  std::span<const ProbVector> at(std::size_t t, std::size_t index) const { return lists_.at(t).at(index); }
  std::size_t horizon() const noexcept { return lists_.size(); }

  // child k of (t, index) has positive probability under some vector
  bool edge_possible(std::size_t t, std::size_t index, std::size_t k) const;
  // the path to (t, index) has positive probability under some selection
  bool relevant(std::size_t t, std::size_t index) const { return relevant_.at(t).at(index); }

  // copy with `extra` appended to the list at (t, index)
  AmbiguityKernel with_extra(const ScenarioTree& tree, std::size_t t, std::size_t index, ProbVector extra) const;

 private:
  void validate_and_index(const ScenarioTree& tree);

  std::vector<std::vector<std::vector<ProbVector>>> lists_;
  std::vector<std::vector<bool>> relevant_;  // depth 0..T
};

/// sum_i p_i v_i in child order; a NEG_INF child with p_i > 0 gives NEG_INF,
/// children with p_i = 0 are skipped.
XReal expectation(std::span<const XReal> values, std::span<const double> probs);

// min over the list of expectation(values, p)
XReal worst_case_expectation(std::span<const XReal> values, std::span<const ProbVector> list);

/// One probability vector per internal node: choice[id] indexes the list at
/// global node id. Entries outside the enumerated subtree stay 0.
struct KernelSelection {
  std::vector<std::uint32_t> choice;
};

/// Odometer over all selections on the subtree of (root_depth, root_index).
/// Usage: do { use(current()); } while (next());
class SelectionEnumerator {
 public:
  SelectionEnumerator(const ScenarioTree& tree, const AmbiguityKernel& kernel, std::size_t root_depth = 0,
                      std::size_t root_index = 0);

  // number of selections, saturating at UINT64_MAX
  std::uint64_t count() const noexcept { return count_; }
  std::uint64_t position() const noexcept { return position_; }
  const KernelSelection& current() const noexcept { return current_; }
  bool next();

 private:
  std::vector<std::size_t> nodes_;  // global ids in the subtree, depth < T
  std::vector<std::uint32_t> radix_;
  KernelSelection current_;
  std::uint64_t count_ = 1;
  std::uint64_t position_ = 0;
};

// probability of every leaf below (root_depth, root_index) under the selection,
// in leaf order
std::vector<double> leaf_probabilities(const ScenarioTree& tree, const AmbiguityKernel& kernel,
                                       const KernelSelection& sel, std::size_t root_depth = 0,
                                       std::size_t root_index = 0);

// sum_leaf P(leaf) v(leaf) with the same absorbing rule as expectation()
XReal path_expectation(std::span<const XReal> leaf_values, std::span<const double> leaf_probs);

/// inf over kernel selections of E[v], by backward minimisation over the
/// per-node lists. leaf_values has one entry per leaf of the full tree.
/// Returns the value at every node (global ids).
std::vector<XReal> robust_expectation_process(const ScenarioTree& tree, const AmbiguityKernel& kernel,
                                              std::span<const XReal> leaf_values);
XReal robust_expectation(const ScenarioTree& tree, const AmbiguityKernel& kernel, std::span<const XReal> leaf_values);

/// The same infimum computed by explicit enumeration of all selections.
/// Throws BudgetError when the selection count exceeds max_selections.
XReal min_over_selections(const ScenarioTree& tree, const AmbiguityKernel& kernel, std::span<const XReal> leaf_values,
                          std::uint64_t max_selections);

// saturating arithmetic for enumeration counts
std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) noexcept;
std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) noexcept;
std::uint64_t sat_pow(std::uint64_t a, std::size_t e) noexcept;

}  // namespace robustdp

#endif
