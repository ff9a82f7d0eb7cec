#include "robustdp/solver.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "robustdp/detail/parallel.hpp"
#include "robustdp/errors.hpp"

namespace robustdp {

// ---------------------------------------------------------------- prefixes

PrefixTree::PrefixTree(const Integrand& psi, std::uint64_t max_entries) : dim_(psi.action_dim()) {
  const std::size_t T = psi.horizon();
  levels_.resize(T + 1);
  levels_[0].parent.push_back(npos);
  std::uint64_t total = 1;
  for (std::size_t t = 0; t < T; ++t) {
    Level& cur = levels_[t];
    Level& next = levels_[t + 1];
    cur.first_child.resize(cur.parent.size());
    cur.child_count.resize(cur.parent.size());
    for (std::size_t p = 0; p < cur.parent.size(); ++p) {
      auto acts = psi.feasible_actions(t, prefix(t, p));
      sort_by_tie_break(acts);
      total += acts.size();
      if (total > max_entries)
        throw BudgetError("prefix tree exceeds " + std::to_string(max_entries) + " entries", total, max_entries, false);
      cur.first_child[p] = next.parent.size();
      cur.child_count[p] = acts.size();
      for (const auto& a : acts) {
        if (a.size() != dim_) throw std::logic_error("feasible action of wrong dimension");
        next.parent.push_back(p);
        next.actions.insert(next.actions.end(), a.begin(), a.end());
      }
    }
  }
  levels_[T].first_child.assign(levels_[T].parent.size(), 0);
  levels_[T].child_count.assign(levels_[T].parent.size(), 0);
}

std::vector<double> PrefixTree::prefix(std::size_t t, std::size_t p) const {
  std::vector<double> out(t * dim_);
  for (std::size_t s = t; s >= 1; --s) {
    auto a = action(s, p);
    std::copy(a.begin(), a.end(), out.begin() + static_cast<std::ptrdiff_t>((s - 1) * dim_));
    p = parent(s, p);
  }
  return out;
}

std::size_t PrefixTree::find(std::span<const double> prefix) const {
  if (prefix.size() % dim_ != 0) return npos;
  const std::size_t t = prefix.size() / dim_;
  if (t >= levels_.size()) return npos;
  std::size_t p = 0;
  for (std::size_t s = 0; s < t; ++s) {
    const auto want = prefix.subspan(s * dim_, dim_);
    std::size_t hit = npos;
    const std::size_t b = first_child(s, p), n = child_count(s, p);
    for (std::size_t q = b; q < b + n; ++q) {
      auto a = action(s + 1, q);
      if (std::equal(a.begin(), a.end(), want.begin())) {
        hit = q;
        break;
      }
    }
    if (hit == npos) return npos;
    p = hit;
  }
  return p;
}

// ---------------------------------------------------------------- values

ValueField::ValueField(PrefixTree prefixes, const ScenarioTree& tree) : prefixes_(std::move(prefixes)) {
  const std::size_t T = tree.horizon();
  psi_.resize(T + 1);
  phi_.resize(T);
  for (std::size_t t = 0; t <= T; ++t) psi_[t].assign(tree.nodes_at(t) * prefixes_.size(t), NEG_INF);
  for (std::size_t t = 0; t < T; ++t) phi_[t].assign(tree.nodes_at(t) * prefixes_.size(t + 1), NEG_INF);
}

XReal ValueField::psi_at(std::size_t t, std::size_t node, std::span<const double> prefix) const {
  if (prefix.size() != t * prefixes_.dim()) return NEG_INF;
  const std::size_t p = prefixes_.find(prefix);
  return p == PrefixTree::npos ? NEG_INF : psi(t, node, p);
}

ValueField backward_induct(const ScenarioTree& tree, const AmbiguityKernel& kernel, const Integrand& psi,
                           const SolveOptions& opts) {
  const std::size_t T = tree.horizon();
  if (psi.horizon() != T || kernel.horizon() != T) throw ConfigError("tree, kernel and model disagree on T");
  PrefixTree prefixes(psi, opts.max_cells);
  std::uint64_t cells = 0;
  for (std::size_t t = 0; t <= T; ++t) cells = sat_add(cells, sat_mul(tree.nodes_at(t), prefixes.size(t)));
  if (cells > opts.max_cells)
    throw BudgetError("value field needs " + std::to_string(cells) + " cells", cells, opts.max_cells, false);

  ValueField vf(std::move(prefixes), tree);
  const PrefixTree& pt = vf.prefixes();

  {
    const std::size_t P = pt.size(T);
    std::vector<std::vector<double>> full(P);
    for (std::size_t p = 0; p < P; ++p) full[p] = pt.prefix(T, p);
    auto& out = vf.psi_level(T);
    detail::parallel_chunks(tree.nodes_at(T), opts.workers, [&](std::size_t, std::size_t b, std::size_t e) {
      for (std::size_t l = b; l < e; ++l)
        for (std::size_t p = 0; p < P; ++p) out[l * P + p] = psi.evaluate(l, full[p]);
    });
  }

  for (std::size_t t = T; t-- > 0;) {
    const std::size_t P = pt.size(t), Q = pt.size(t + 1), b = tree.branching(t);
    const auto& next = vf.psi_level(t + 1);
    auto& phi = vf.phi_level(t);
    auto& cur = vf.psi_level(t);
    detail::parallel_chunks(tree.nodes_at(t), opts.workers, [&](std::size_t, std::size_t lo, std::size_t hi) {
      std::vector<XReal> vals(b);
      for (std::size_t i = lo; i < hi; ++i) {
        const auto list = kernel.at(t, i);
        for (std::size_t q = 0; q < Q; ++q) {
          for (std::size_t k = 0; k < b; ++k) vals[k] = next[tree.child(t, i, k) * Q + q];
          phi[i * Q + q] = worst_case_expectation(vals, list);
        }
        for (std::size_t p = 0; p < P; ++p) {
          XReal best = NEG_INF;
          const std::size_t f = pt.first_child(t, p), n = pt.child_count(t, p);
          for (std::size_t q = f; q < f + n; ++q) best = xmax(best, phi[i * Q + q]);
          cur[i * P + p] = best;
        }
      }
    });
  }

  if (vf.root().is_neg_inf()) throw InfeasibleProblem("robust value is -inf: no strategy has finite worst-case utility");
  return vf;
}

// ---------------------------------------------------------------- policy

PolicyTable::PolicyTable(const ValueField& values, const ScenarioTree& tree, double tolerance)
    : prefixes_(&values.prefixes()), root_(values.root()) {
  const std::size_t T = tree.horizon();
  const PrefixTree& pt = *prefixes_;
  size_.resize(T + 1);
  for (std::size_t t = 0; t <= T; ++t) size_[t] = pt.size(t);
  choice_.resize(T);
  for (std::size_t t = 0; t < T; ++t) {
    const std::size_t P = size_[t];
    choice_[t].assign(tree.nodes_at(t) * P, PrefixTree::npos);
    for (std::size_t i = 0; i < tree.nodes_at(t); ++i)
      for (std::size_t p = 0; p < P; ++p) {
        const XReal v = values.psi(t, i, p);
        const std::size_t f = pt.first_child(t, p), n = pt.child_count(t, p);
        // children are in tie-break order, so the first admissible one wins
        for (std::size_t q = f; q < f + n; ++q) {
          const XReal w = values.phi(t, i, q);
          if (w == v || (v.is_finite() && w.is_finite() && w.value() >= v.value() - tolerance)) {
            choice_[t][i * P + p] = q;
            break;
          }
        }
      }
  }

  realized_ = zero_strategy(tree, pt.dim());
  reached_.resize(T + 1);
  reached_[0] = {0};
  for (std::size_t t = 0; t < T; ++t) {
    reached_[t + 1].assign(tree.nodes_at(t + 1), PrefixTree::npos);
    for (std::size_t i = 0; i < tree.nodes_at(t); ++i) {
      const std::size_t q = choice(t, i, reached_[t][i]);
      if (q == PrefixTree::npos) throw std::logic_error("policy reaches a prefix without feasible actions");
      auto a = pt.action(t + 1, q);
      std::copy(a.begin(), a.end(), realized_.at(tree.id(t, i)).begin());
      for (std::size_t k = 0; k < tree.branching(t); ++k) reached_[t + 1][tree.child(t, i, k)] = q;
    }
  }
}

std::span<const double> PolicyTable::action(std::size_t t, std::size_t node, std::size_t p) const {
  const std::size_t q = choice(t, node, p);
  if (q == PrefixTree::npos) return {};
  return prefixes_->action(t + 1, q);
}

PolicyTable extract_policy(const ValueField& values, const ScenarioTree& tree, double tolerance) {
  return PolicyTable(values, tree, tolerance);
}

// ---------------------------------------------------------------- evaluation

namespace {

std::vector<XReal> terminal_values(const ScenarioTree& tree, const Integrand& psi, const AdaptedStrategy& h) {
  std::vector<XReal> v(tree.leaf_count());
  for (std::size_t l = 0; l < v.size(); ++l) v[l] = psi.evaluate_strategy(l, h);
  return v;
}

}  // namespace

std::vector<XReal> pinned_value_process(const ScenarioTree& tree, const AmbiguityKernel& kernel, const Integrand& psi,
                                        const AdaptedStrategy& h) {
  return robust_expectation_process(tree, kernel, terminal_values(tree, psi, h));
}

PolicyEvaluation evaluate_policy(const ScenarioTree& tree, const AmbiguityKernel& kernel, const Integrand& psi,
                                 const AdaptedStrategy& h, std::uint64_t max_selections, double tolerance) {
  const auto leaf = terminal_values(tree, psi, h);
  PolicyEvaluation out;
  out.pinned = robust_expectation(tree, kernel, leaf);
  SelectionEnumerator en(tree, kernel);
  out.selections = en.count();
  if (en.count() <= max_selections) {
    out.enumerated = min_over_selections(tree, kernel, leaf, max_selections);
    if (!near(*out.enumerated, out.pinned, tolerance))
      throw ConsistencyError("policy value: pinned recursion " + to_string(out.pinned) + " vs selection enumeration " +
                             to_string(*out.enumerated));
  }
  return out;
}

}  // namespace robustdp
