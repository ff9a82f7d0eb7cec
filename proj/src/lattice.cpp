#include "robustdp/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "robustdp/errors.hpp"

namespace robustdp {

std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) noexcept {
  if (a == 0 || b == 0) return 0;
  if (a > std::numeric_limits<std::uint64_t>::max() / b) return std::numeric_limits<std::uint64_t>::max();
  return a * b;
}

std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) noexcept {
  std::uint64_t s = a + b;
  return s < a ? std::numeric_limits<std::uint64_t>::max() : s;
}

std::uint64_t sat_pow(std::uint64_t a, std::size_t e) noexcept {
  std::uint64_t r = 1;
  for (std::size_t i = 0; i < e; ++i) r = sat_mul(r, a);
  return r;
}

// ---------------------------------------------------------------- tree

ScenarioTree::ScenarioTree(std::vector<std::vector<Outcome>> stages) : stages_(std::move(stages)) {
  if (stages_.empty()) throw ConfigError("scenario tree: at least one stage is required");
  level_size_.assign(1, 1);
  for (std::size_t t = 0; t < stages_.size(); ++t) {
    if (stages_[t].empty()) throw ConfigError("scenario tree: stage " + std::to_string(t + 1) + " has no outcomes");
    for (const auto& o : stages_[t])
      for (double v : o)
        if (!std::isfinite(v)) throw ConfigError("scenario tree: outcome values must be finite");
    std::size_t n = level_size_.back() * stages_[t].size();
    if (n / stages_[t].size() != level_size_.back() || n > (std::size_t{1} << 26))
      throw ConfigError("scenario tree: too many nodes");
    level_size_.push_back(n);
  }
  offset_.assign(1, 0);
  for (std::size_t s : level_size_) offset_.push_back(offset_.back() + s);
}

std::size_t ScenarioTree::depth_of(std::size_t id) const {
  if (id >= node_count()) throw std::out_of_range("scenario tree: node id out of range");
  auto it = std::upper_bound(offset_.begin(), offset_.end(), id);
  return static_cast<std::size_t>(it - offset_.begin()) - 1;
}

std::size_t ScenarioTree::ancestor(std::size_t t, std::size_t index, std::size_t to) const {
  for (std::size_t s = t; s > to; --s) index /= branching(s - 1);
  return index;
}

std::vector<std::size_t> ScenarioTree::path(std::size_t t, std::size_t index) const {
  std::vector<std::size_t> p(t);
  for (std::size_t s = t; s > 0; --s) {
    p[s - 1] = index % branching(s - 1);
    index /= branching(s - 1);
  }
  return p;
}

std::size_t ScenarioTree::encode(std::span<const std::size_t> p) const {
  if (p.size() > horizon()) throw std::invalid_argument("scenario tree: path longer than horizon");
  std::size_t index = 0;
  for (std::size_t s = 0; s < p.size(); ++s) {
    if (p[s] >= branching(s)) throw std::invalid_argument("scenario tree: outcome index out of range");
    index = index * branching(s) + p[s];
  }
  return index;
}

// ---------------------------------------------------------------- kernel

AmbiguityKernel::AmbiguityKernel(const ScenarioTree& tree, std::vector<std::vector<std::vector<ProbVector>>> lists)
    : lists_(std::move(lists)) {
  validate_and_index(tree);
}

AmbiguityKernel AmbiguityKernel::homogeneous(const ScenarioTree& tree,
                                             const std::vector<std::vector<ProbVector>>& per_depth) {
  if (per_depth.size() != tree.horizon())
    throw ConfigError("kernel: per-depth list count " + std::to_string(per_depth.size()) + " does not match horizon " +
                      std::to_string(tree.horizon()));
  std::vector<std::vector<std::vector<ProbVector>>> lists(tree.horizon());
  for (std::size_t t = 0; t < tree.horizon(); ++t) lists[t].assign(tree.nodes_at(t), per_depth[t]);
  return AmbiguityKernel(tree, std::move(lists));
}

void AmbiguityKernel::validate_and_index(const ScenarioTree& tree) {
  const std::size_t T = tree.horizon();
  if (lists_.size() != T) throw ConfigError("kernel: expected one level per period");
  for (std::size_t t = 0; t < T; ++t) {
    if (lists_[t].size() != tree.nodes_at(t))
      throw ConfigError("kernel: depth " + std::to_string(t) + " needs " + std::to_string(tree.nodes_at(t)) +
                        " node lists");
    for (std::size_t i = 0; i < lists_[t].size(); ++i) {
      auto& list = lists_[t][i];
      const std::string where = "kernel at node (" + std::to_string(t) + "," + std::to_string(i) + ")";
      if (list.empty()) throw ConfigError(where + ": empty list");
      for (auto& p : list) {
        if (p.size() != tree.branching(t))
          throw ConfigError(where + ": vector of length " + std::to_string(p.size()) + ", expected " +
                            std::to_string(tree.branching(t)));
        double s = 0.0;
        for (double v : p) {
          if (!std::isfinite(v) || v < 0.0) throw ConfigError(where + ": negative or non-finite probability");
          s += v;
        }
        if (std::fabs(s - 1.0) > kTolerance) throw ConfigError(where + ": probabilities do not sum to 1");
        if (s != 1.0)
          for (double& v : p) v /= s;
      }
    }
  }
  relevant_.assign(T + 1, {});
  relevant_[0].assign(1, true);
  for (std::size_t t = 0; t < T; ++t) {
    relevant_[t + 1].assign(tree.nodes_at(t + 1), false);
    for (std::size_t i = 0; i < tree.nodes_at(t); ++i) {
      if (!relevant_[t][i]) continue;
      for (std::size_t k = 0; k < tree.branching(t); ++k)
        if (edge_possible(t, i, k)) relevant_[t + 1][tree.child(t, i, k)] = true;
    }
  }
}

bool AmbiguityKernel::edge_possible(std::size_t t, std::size_t index, std::size_t k) const {
  for (const auto& p : lists_.at(t).at(index))
    if (p.at(k) > 0.0) return true;
  return false;
}

AmbiguityKernel AmbiguityKernel::with_extra(const ScenarioTree& tree, std::size_t t, std::size_t index,
                                            ProbVector extra) const {
  auto lists = lists_;
  lists.at(t).at(index).push_back(std::move(extra));
  return AmbiguityKernel(tree, std::move(lists));
}

// ---------------------------------------------------------------- expectations

XReal expectation(std::span<const XReal> values, std::span<const double> probs) {
  if (values.size() != probs.size())
    throw std::invalid_argument("expectation: " + std::to_string(values.size()) + " values but " +
                                std::to_string(probs.size()) + " probabilities");
  double acc = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (probs[i] == 0.0) continue;
    if (values[i].is_neg_inf()) return NEG_INF;
    acc += probs[i] * values[i].value();
  }
  return XReal(acc);
}

XReal worst_case_expectation(std::span<const XReal> values, std::span<const ProbVector> list) {
  if (list.empty()) throw std::invalid_argument("worst_case_expectation: empty kernel list");
  XReal best = expectation(values, list[0]);
  for (std::size_t j = 1; j < list.size(); ++j) best = xmin(best, expectation(values, list[j]));
  return best;
}

XReal path_expectation(std::span<const XReal> leaf_values, std::span<const double> leaf_probs) {
  return expectation(leaf_values, leaf_probs);
}

std::vector<XReal> robust_expectation_process(const ScenarioTree& tree, const AmbiguityKernel& kernel,
                                              std::span<const XReal> leaf_values) {
  if (leaf_values.size() != tree.leaf_count()) throw std::invalid_argument("robust_expectation: one value per leaf");
  const std::size_t T = tree.horizon();
  std::vector<XReal> out(tree.node_count());
  std::copy(leaf_values.begin(), leaf_values.end(), out.begin() + static_cast<std::ptrdiff_t>(tree.id(T, 0)));
  for (std::size_t t = T; t-- > 0;) {
    const std::size_t b = tree.branching(t);
    for (std::size_t i = 0; i < tree.nodes_at(t); ++i) {
      std::span<const XReal> kids(out.data() + tree.id(t + 1, tree.child(t, i, 0)), b);
      out[tree.id(t, i)] = worst_case_expectation(kids, kernel.at(t, i));
    }
  }
  return out;
}

XReal robust_expectation(const ScenarioTree& tree, const AmbiguityKernel& kernel, std::span<const XReal> leaf_values) {
  return robust_expectation_process(tree, kernel, leaf_values)[0];
}

// ---------------------------------------------------------------- selections

SelectionEnumerator::SelectionEnumerator(const ScenarioTree& tree, const AmbiguityKernel& kernel,
                                         std::size_t root_depth, std::size_t root_index) {
  current_.choice.assign(tree.internal_count(), 0);
  std::size_t lo = root_index, hi = root_index + 1;
  for (std::size_t t = root_depth; t < tree.horizon(); ++t) {
    for (std::size_t i = lo; i < hi; ++i) {
      nodes_.push_back(tree.id(t, i));
      radix_.push_back(static_cast<std::uint32_t>(kernel.at(t, i).size()));
      count_ = sat_mul(count_, radix_.back());
    }
    lo *= tree.branching(t);
    hi *= tree.branching(t);
  }
}

bool SelectionEnumerator::next() {
  // last node varies fastest
  for (std::size_t k = nodes_.size(); k-- > 0;) {
    auto& c = current_.choice[nodes_[k]];
    if (++c < radix_[k]) {
      ++position_;
      return true;
    }
    c = 0;
  }
  return false;
}

std::vector<double> leaf_probabilities(const ScenarioTree& tree, const AmbiguityKernel& kernel,
                                       const KernelSelection& sel, std::size_t root_depth, std::size_t root_index) {
  std::vector<double> level{1.0};
  std::size_t first = root_index;
  for (std::size_t t = root_depth; t < tree.horizon(); ++t) {
    const std::size_t b = tree.branching(t);
    std::vector<double> next(level.size() * b);
    for (std::size_t j = 0; j < level.size(); ++j) {
      const std::size_t i = first + j;
      const auto& p = kernel.at(t, i)[sel.choice.at(tree.id(t, i))];
      for (std::size_t k = 0; k < b; ++k) next[j * b + k] = level[j] * p[k];
    }
    level = std::move(next);
    first *= b;
  }
  return level;
}

XReal min_over_selections(const ScenarioTree& tree, const AmbiguityKernel& kernel, std::span<const XReal> leaf_values,
                          std::uint64_t max_selections) {
  if (leaf_values.size() != tree.leaf_count()) throw std::invalid_argument("min_over_selections: one value per leaf");
  SelectionEnumerator e(tree, kernel);
  if (e.count() > max_selections)
    throw BudgetError("kernel selection count " + std::to_string(e.count()) + " exceeds budget " +
                          std::to_string(max_selections),
                      e.count(), max_selections, e.count() == std::numeric_limits<std::uint64_t>::max());
  XReal best = XReal(std::numeric_limits<double>::max());
  do {
    best = xmin(best, path_expectation(leaf_values, leaf_probabilities(tree, kernel, e.current())));
  } while (e.next());
  return best;
}

}  // namespace robustdp
