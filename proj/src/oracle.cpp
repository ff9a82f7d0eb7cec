#include "robustdp/oracle.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "robustdp/detail/parallel.hpp"
#include "robustdp/errors.hpp"

namespace robustdp {

namespace {

bool is_active(const NodeMask& active, std::size_t id) { return active.empty() || active[id]; }

std::vector<double> node_prefix(const ScenarioTree& tree, const AdaptedStrategy& h, std::size_t t, std::size_t i) {
  std::vector<double> prefix;
  prefix.reserve(t * h.dim);
  for (std::size_t s = 0; s < t; ++s) {
    auto a = h.at(tree.id(s, tree.ancestor(t, i, s)));
    prefix.insert(prefix.end(), a.begin(), a.end());
  }
  return prefix;
}

std::vector<Point> sorted_actions(const Integrand& psi, std::size_t t, const std::vector<double>& prefix) {
  auto acts = psi.feasible_actions(t, prefix);
  if (acts.empty()) throw std::logic_error("oracle: prefix without feasible actions");
  sort_by_tie_break(acts);
  return acts;
}

// count over the subtree of (t, i) given its prefix; the mask makes subtrees
// of one node differ, so each child is counted separately
std::uint64_t count_subtree(const Integrand& psi, const NodeMask& active, std::size_t t, std::size_t i,
                            std::vector<double>& prefix) {
  const auto& tree = psi.tree();
  if (t == tree.horizon()) return 1;
  auto acts = sorted_actions(psi, t, prefix);
  if (!is_active(active, tree.id(t, i))) acts.resize(1);
  std::uint64_t total = 0;
  for (const auto& a : acts) {
    prefix.insert(prefix.end(), a.begin(), a.end());
    std::uint64_t prod = 1;
    for (std::size_t k = 0; k < tree.branching(t) && prod != 0; ++k)
      prod = sat_mul(prod, count_subtree(psi, active, t + 1, tree.child(t, i, k), prefix));
    prefix.resize(prefix.size() - a.size());
    total = sat_add(total, prod);
  }
  return total;
}

class Enumerator {
 public:
  Enumerator(const Integrand& psi, const NodeMask& active, const std::function<void(const AdaptedStrategy&)>& visit)
      : psi_(psi), tree_(psi.tree()), active_(active), visit_(visit), h_(zero_strategy(tree_, psi.action_dim())) {}

  void run() { step(0); }

 private:
  void step(std::size_t id) {
    if (id == tree_.internal_count()) {
      visit_(h_);
      return;
    }
    const std::size_t t = tree_.depth_of(id), i = tree_.index_of(id);
    auto acts = sorted_actions(psi_, t, node_prefix(tree_, h_, t, i));
    if (!is_active(active_, id)) acts.resize(1);
    for (const auto& a : acts) {
      std::copy(a.begin(), a.end(), h_.at(id).begin());
      step(id + 1);
    }
  }

  const Integrand& psi_;
  const ScenarioTree& tree_;
  const NodeMask& active_;
  const std::function<void(const AdaptedStrategy&)>& visit_;
  AdaptedStrategy h_;
};

struct SparseLaw {
  std::vector<std::uint32_t> leaf;
  std::vector<double> prob;
};

std::vector<SparseLaw> all_laws(const ScenarioTree& tree, const AmbiguityKernel& kernel, std::uint64_t limit) {
  SelectionEnumerator e(tree, kernel);
  if (e.count() > limit)
    throw BudgetError("kernel selection count " + std::to_string(e.count()) + " exceeds budget " +
                          std::to_string(limit),
                      e.count(), limit, e.count() == std::numeric_limits<std::uint64_t>::max());
  std::vector<SparseLaw> laws;
  laws.reserve(e.count());
  do {
    const auto p = leaf_probabilities(tree, kernel, e.current());
    SparseLaw s;
    for (std::size_t l = 0; l < p.size(); ++l)
      if (p[l] != 0.0) {
        s.leaf.push_back(static_cast<std::uint32_t>(l));
        s.prob.push_back(p[l]);
      }
    laws.push_back(std::move(s));
  } while (e.next());
  return laws;
}

XReal min_over_laws(const std::vector<SparseLaw>& laws, const std::vector<XReal>& v) {
  XReal best = XReal(std::numeric_limits<double>::max());
  for (const auto& law : laws) {
    double acc = 0.0;
    bool dead = false;
    for (std::size_t j = 0; j < law.leaf.size(); ++j) {
      const XReal x = v[law.leaf[j]];
      if (x.is_neg_inf()) {
        dead = true;
        break;
      }
      acc += law.prob[j] * x.value();
    }
    if (dead) return NEG_INF;
    best = xmin(best, XReal(acc));
  }
  return best;
}

void check_strategy_budget(std::uint64_t count, std::uint64_t limit) {
  if (count > limit)
    throw BudgetError("adapted strategy count " + std::to_string(count) + " exceeds budget " + std::to_string(limit),
                      count, limit, count == std::numeric_limits<std::uint64_t>::max());
}

}  // namespace

std::uint64_t count_adapted(const Integrand& psi, const NodeMask& active) {
  std::vector<double> prefix;
  return count_subtree(psi, active, 0, 0, prefix);
}

void enumerate_adapted(const Integrand& psi, const std::function<void(const AdaptedStrategy&)>& visit,
                       std::uint64_t limit, const NodeMask& active) {
  check_strategy_budget(count_adapted(psi, active), limit);
  Enumerator(psi, active, visit).run();
}

XReal oracle_value(const ScenarioTree& tree, const AmbiguityKernel& kernel, const Integrand& psi,
                   const AdaptedStrategy& h, const EnumerationBudget& budget) {
  const auto laws = all_laws(tree, kernel, budget.selections);
  std::vector<XReal> v(tree.leaf_count());
  for (std::size_t l = 0; l < v.size(); ++l) v[l] = psi.evaluate_strategy(l, h);
  return min_over_laws(laws, v);
}

OracleResult supinf_bruteforce(const ScenarioTree& tree, const AmbiguityKernel& kernel, const Integrand& psi,
                               const EnumerationBudget& budget, unsigned workers, double tolerance) {
  const std::uint64_t count = count_adapted(psi);
  check_strategy_budget(count, budget.strategies);
  const auto laws = all_laws(tree, kernel, budget.selections);

  struct Local {
    XReal max = NEG_INF;
    std::vector<std::pair<std::uint64_t, XReal>> candidates;  // within tolerance of max, by index
  };
  const unsigned w = std::max(1u, workers);
  std::vector<Local> local(w);
  auto admits = [tolerance](XReal v, XReal max) {
    return v == max || (v.is_finite() && max.is_finite() && v.value() >= max.value() - tolerance);
  };

  detail::parallel_workers(w, [&](unsigned k) {
    Local& me = local[k];
    std::vector<XReal> v(tree.leaf_count());
    std::uint64_t index = 0;
    Enumerator(psi, {}, [&](const AdaptedStrategy& h) {
      const std::uint64_t my = index++;
      if (my % w != k) return;
      for (std::size_t l = 0; l < v.size(); ++l) v[l] = psi.evaluate_strategy(l, h);
      const XReal val = min_over_laws(laws, v);
      if (val > me.max) {
        me.max = val;
        std::erase_if(me.candidates, [&](const auto& c) { return !admits(c.second, me.max); });
      }
      if (admits(val, me.max)) me.candidates.emplace_back(my, val);
    }).run();
  });

  XReal max = NEG_INF;
  for (const auto& l : local) max = xmax(max, l.max);
  std::uint64_t best = std::numeric_limits<std::uint64_t>::max();
  for (const auto& l : local)
    for (const auto& [idx, val] : l.candidates)
      if (admits(val, max)) best = std::min(best, idx);

  OracleResult out;
  out.value = max;
  out.strategies = count;
  out.selections = laws.size();
  std::uint64_t index = 0;
  bool found = false;
  Enumerator(psi, {}, [&](const AdaptedStrategy& h) {
    if (index++ == best) {
      out.argmax = h;
      found = true;
    }
  }).run();
  if (!found) throw std::logic_error("oracle: argmax index not revisited");
  return out;
}

// ---------------------------------------------------------------- stopping

std::uint64_t count_stopping_times(const ScenarioTree& tree) {
  std::uint64_t c = 1;
  for (std::size_t t = tree.horizon(); t-- > 0;) c = sat_add(1, sat_pow(c, tree.branching(t)));
  return c;
}

StoppingOracleResult stopping_bruteforce(const ScenarioTree& tree, const AmbiguityKernel& kernel,
                                         const StoppingModel& model, const EnumerationBudget& budget,
                                         double tolerance) {
  const std::uint64_t count = count_stopping_times(tree);
  check_strategy_budget(count, budget.strategies);
  const auto laws = all_laws(tree, kernel, budget.selections);
  const std::size_t T = tree.horizon();
  const auto& G = model.payoff();

  // decide nodes in global id order; 0 = stop first, matching the strategy tie-break
  std::vector<int> state(tree.node_count(), 0);  // 1 = alive (not stopped before reaching it)
  std::vector<std::size_t> tau(tree.leaf_count(), T);
  StoppingOracleResult out;
  out.value = NEG_INF;
  out.stopping_times = count;
  std::vector<std::pair<StoppingTime, XReal>> seen;
  std::vector<XReal> v(tree.leaf_count());

  std::function<void(std::size_t)> step = [&](std::size_t id) {
    if (id == tree.internal_count()) {
      for (std::size_t l = 0; l < tree.leaf_count(); ++l) {
        const double g = G.at(tau[l], tree.ancestor(T, l, tau[l]));
        v[l] = std::isinf(g) ? NEG_INF : XReal(g);
      }
      seen.emplace_back(StoppingTime{tau}, min_over_laws(laws, v));
      return;
    }
    const std::size_t t = tree.depth_of(id), i = tree.index_of(id);
    const bool alive = t == 0 || state[tree.id(t - 1, tree.parent(t, i))] == 2;
    if (!alive) {
      state[id] = 0;
      step(id + 1);
      return;
    }
    // stop here: every leaf below gets tau = t
    const std::size_t span = tree.leaf_count() / tree.nodes_at(t);
    std::vector<std::size_t> saved(tau.begin() + static_cast<std::ptrdiff_t>(i * span),
                                   tau.begin() + static_cast<std::ptrdiff_t>((i + 1) * span));
    std::fill(tau.begin() + static_cast<std::ptrdiff_t>(i * span), tau.begin() + static_cast<std::ptrdiff_t>((i + 1) * span), t);
    state[id] = 1;
    step(id + 1);
    std::copy(saved.begin(), saved.end(), tau.begin() + static_cast<std::ptrdiff_t>(i * span));
    state[id] = 2;  // continue
    step(id + 1);
    state[id] = 0;
  };
  step(0);

  for (const auto& s : seen) out.value = xmax(out.value, s.second);
  for (const auto& s : seen)
    if (s.second == out.value ||
        (s.second.is_finite() && out.value.is_finite() && s.second.value() >= out.value.value() - tolerance)) {
      out.tau = s.first;
      break;
    }
  return out;
}

}  // namespace robustdp
