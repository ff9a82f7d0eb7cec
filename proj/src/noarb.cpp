#include "robustdp/noarb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "robustdp/detail/parallel.hpp"
#include "robustdp/errors.hpp"
#include "robustdp/models.hpp"
#include "robustdp/oracle.hpp"
#include "robustdp/solver.hpp"

namespace robustdp {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Holds: return "holds";
    case Verdict::Fails: return "fails";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

namespace {

constexpr double kGainTol = 1e-12;

double total_norm2(const AdaptedStrategy& h) {
  double s = 0.0;
  for (double v : h.actions) s += v * v;
  return s;
}

std::size_t first_nonzero(const AdaptedStrategy& h) {
  std::size_t j = 0;
  while (j < h.actions.size() && h.actions[j] == 0.0) ++j;
  return j;
}

int first_sign(const AdaptedStrategy& h) {
  for (double v : h.actions)
    if (v != 0.0) return v > 0.0 ? 1 : -1;
  return 0;
}

bool is_zero_on(const ScenarioTree& tree, const AmbiguityKernel& kernel, const AdaptedStrategy& h) {
  for (std::size_t id = 0; id < tree.internal_count(); ++id) {
    if (!kernel.relevant(tree.depth_of(id), tree.index_of(id))) continue;
    for (double v : h.at(id))
      if (v != 0.0) return false;
  }
  return true;
}

NodeMask relevant_mask(const ScenarioTree& tree, const AmbiguityKernel& kernel) {
  NodeMask m(tree.internal_count());
  for (std::size_t id = 0; id < m.size(); ++id) m[id] = kernel.relevant(tree.depth_of(id), tree.index_of(id));
  return m;
}

// Psi^inf at (leaf, x); `stable` is cleared when the numeric estimate did not settle
XReal horizon_at(const Integrand& psi, std::size_t leaf, std::span<const double> x, const NaOptions& opts,
                 bool& stable, bool& numeric) {
  if (!opts.force_numeric) {
    if (auto h = psi.analytic_horizon(leaf, x)) return *h;
  }
  numeric = true;
  const auto est = horizon_numeric(psi, leaf, x);
  if (!est.stabilized) stable = false;
  return est.value;
}

bool nonneg(XReal v, double tol) { return v.is_finite() && v.value() >= -tol; }

}  // namespace

bool witness_less(const AdaptedStrategy& a, const AdaptedStrategy& b) noexcept {
  const double na = total_norm2(a), nb = total_norm2(b);
  if (na != nb) return na < nb;
  const std::size_t ja = first_nonzero(a), jb = first_nonzero(b);
  if (ja != jb) return ja < jb;
  const int sa = first_sign(a), sb = first_sign(b);
  if (sa != sb) return sa > sb;
  return strategy_tie_less(a, b);
}

GlobalNa global_na_check(const ScenarioTree& tree, const AmbiguityKernel& kernel, const Integrand& psi,
                         const NaOptions& opts) {
  const NodeMask mask = relevant_mask(tree, kernel);
  const std::uint64_t count = count_adapted(psi, mask);
  if (count > opts.max_strategies)
    throw BudgetError("NA search: adapted strategy count " + std::to_string(count) + " exceeds budget " +
                          std::to_string(opts.max_strategies),
                      count, opts.max_strategies, count == std::numeric_limits<std::uint64_t>::max());
  const std::size_t T = tree.horizon();
  std::vector<std::size_t> leaves;
  for (std::size_t l = 0; l < tree.leaf_count(); ++l)
    if (kernel.relevant(T, l)) leaves.push_back(l);

  struct Local {
    std::optional<AdaptedStrategy> best;
    bool stable = true, numeric = false;
  };
  const unsigned w = std::max(1u, opts.workers);
  std::vector<Local> local(w);
  detail::parallel_workers(w, [&](unsigned k) {
    Local& me = local[k];
    std::uint64_t index = 0;
    enumerate_adapted(
        psi,
        [&](const AdaptedStrategy& h) {
          if (index++ % w != k) return;
          if (is_zero_on(tree, kernel, h)) return;
          for (std::size_t l : leaves)
            if (!nonneg(horizon_at(psi, l, h.along_path(tree, l), opts, me.stable, me.numeric), opts.tolerance))
              return;
          if (!me.best || witness_less(h, *me.best)) me.best = h;
        },
        std::numeric_limits<std::uint64_t>::max(), mask);
  });

  GlobalNa out;
  out.strategies = count;
  bool stable = true, numeric = false;
  for (auto& l : local) {
    stable = stable && l.stable;
    numeric = numeric || l.numeric;
    if (l.best && (!out.witness || witness_less(*l.best, *out.witness))) out.witness = l.best;
  }
  out.method = numeric ? "numeric" : "analytic";
  if (!stable) out.verdict = Verdict::Inconclusive;
  else out.verdict = out.witness ? Verdict::Fails : Verdict::Holds;
  return out;
}

std::vector<AdaptedStrategy> per_measure_scan(const ScenarioTree& tree, const AmbiguityKernel& kernel,
                                              const Integrand& psi, const KernelSelection& sel,
                                              const NaOptions& opts) {
  const std::size_t T = tree.horizon();
  const std::vector<double> zero(T * psi.action_dim(), 0.0);
  if (!psi.gain(0, zero)) throw NotAvailable("per-measure scan needs a gain-form model");
  const auto prob = leaf_probabilities(tree, kernel, sel);
  std::vector<std::size_t> support;
  for (std::size_t l = 0; l < prob.size(); ++l)
    if (prob[l] > 0.0) support.push_back(l);
  // nodes on some positive-probability path
  NodeMask mask(tree.internal_count(), false);
  for (std::size_t l : support)
    for (std::size_t t = 0; t < T; ++t) mask[tree.id(t, tree.ancestor(T, l, t))] = true;

  const std::uint64_t count = count_adapted(psi, mask);
  if (count > opts.max_strategies)
    throw BudgetError("per-measure scan: strategy count " + std::to_string(count) + " exceeds budget", count,
                      opts.max_strategies, count == std::numeric_limits<std::uint64_t>::max());
  std::vector<AdaptedStrategy> out;
  enumerate_adapted(
      psi,
      [&](const AdaptedStrategy& h) {
        bool positive = false;
        for (std::size_t l : support) {
          const double g = *psi.gain(l, h.along_path(tree, l));
          if (g < -kGainTol) return;
          if (g > kGainTol) positive = true;
        }
        if (positive) out.push_back(h);
      },
      std::numeric_limits<std::uint64_t>::max(), mask);
  std::sort(out.begin(), out.end(), witness_less);
  return out;
}

LocalCone local_cone(const ScenarioTree& tree, const AmbiguityKernel& kernel, const Integrand& psi, std::size_t t,
                     std::size_t index, const NaOptions& opts) {
  const std::size_t T = tree.horizon(), d = psi.action_dim();
  LocalCone cone;
  cone.depth = t;
  cone.index = index;
  auto acts = psi.feasible_actions(t, std::vector<double>(t * d, 0.0));
  sort_by_tie_break(acts);
  const std::size_t b = tree.branching(t);

  const auto* fm = dynamic_cast<const FrictionlessModel*>(&psi);
  if (fm && fm->domain_shape() == DomainShape::Lattice) {
    cone.exact = true;
    const auto& S = fm->prices();
    for (const auto& a : acts) {
      bool ok = true;
      for (std::size_t k = 0; k < b && ok; ++k) {
        if (!kernel.edge_possible(t, index, k)) continue;
        const std::size_t c = tree.child(t, index, k);
        double g = 0.0;
        for (std::size_t j = 0; j < d; ++j) g += a[j] * (S.at(t + 1, c, j) - S.at(t, index, j));
        ok = g >= -kGainTol;
      }
      if (ok) cone.members.push_back(a);
    }
    return cone;
  }

  // surrogate: inf over selections on the subtree of E[Psi_T^inf(0,..,0,a,0,..)];
  // exact on finite domains, where only a = 0 survives
  cone.exact = psi.domain_shape() == DomainShape::Finite;
  const std::size_t span = tree.leaf_count() / tree.nodes_at(t);
  for (const auto& a : acts) {
    std::vector<double> x(T * d, 0.0);
    std::copy(a.begin(), a.end(), x.begin() + static_cast<std::ptrdiff_t>(t * d));
    bool stable = true, numeric = false;
    std::vector<XReal> level(span);
    for (std::size_t j = 0; j < span; ++j) level[j] = horizon_at(psi, index * span + j, x, opts, stable, numeric);
    std::size_t first = index * span;
    for (std::size_t s = T; s-- > t;) {
      const std::size_t bs = tree.branching(s);
      first /= bs;
      std::vector<XReal> up(level.size() / bs);
      for (std::size_t j = 0; j < up.size(); ++j)
        up[j] = worst_case_expectation(std::span<const XReal>(level.data() + j * bs, bs), kernel.at(s, first + j));
      level = std::move(up);
    }
    if (stable && nonneg(level[0], opts.tolerance)) cone.members.push_back(a);
  }
  return cone;
}

Verdict horizon_dp_verdict(const ScenarioTree& tree, const AmbiguityKernel& kernel, const Integrand& psi,
                           const NaOptions& opts) {
  const std::size_t T = tree.horizon();
  const PrefixTree pt(psi);
  bool stable = true, numeric = false;
  // A: some continuation keeps Psi^inf at 0 q.s.; B: the same, nonzero somewhere relevant
  std::vector<char> A(tree.nodes_at(T) * pt.size(T)), B(A.size(), 0);
  {
    const std::size_t P = pt.size(T);
    for (std::size_t p = 0; p < P; ++p) {
      const auto x = pt.prefix(T, p);
      for (std::size_t l = 0; l < tree.leaf_count(); ++l)
        A[l * P + p] = kernel.relevant(T, l) && nonneg(horizon_at(psi, l, x, opts, stable, numeric), opts.tolerance);
    }
  }
  for (std::size_t t = T; t-- > 0;) {
    const std::size_t P = pt.size(t), Q = pt.size(t + 1), b = tree.branching(t);
    std::vector<char> a(tree.nodes_at(t) * P, 0), bb(a.size(), 0);
    for (std::size_t i = 0; i < tree.nodes_at(t); ++i) {
      if (!kernel.relevant(t, i)) continue;
      for (std::size_t p = 0; p < P; ++p) {
        const std::size_t f = pt.first_child(t, p), n = pt.child_count(t, p);
        for (std::size_t q = f; q < f + n; ++q) {
          bool all_a = true, any_b = false;
          for (std::size_t k = 0; k < b; ++k) {
            if (!kernel.edge_possible(t, i, k)) continue;
            const std::size_t c = tree.child(t, i, k);
            all_a = all_a && A[c * Q + q];
            any_b = any_b || B[c * Q + q];
          }
          if (!all_a) continue;
          a[i * P + p] = 1;
          const auto act = pt.action(t + 1, q);
          const bool nonzero = std::any_of(act.begin(), act.end(), [](double v) { return v != 0.0; });
          if (nonzero || any_b) bb[i * P + p] = 1;
        }
      }
    }
    A = std::move(a);
    B = std::move(bb);
  }
  if (!stable) return Verdict::Inconclusive;
  return B[0] ? Verdict::Fails : Verdict::Holds;
}

bool horizon_dp_check(const ScenarioTree& tree, const AmbiguityKernel& kernel, const Integrand& psi,
                      const GlobalNa& global, const NaOptions& opts) {
  const Verdict v = horizon_dp_verdict(tree, kernel, psi, opts);
  if (v != Verdict::Inconclusive && global.verdict != Verdict::Inconclusive && v != global.verdict)
    throw ConsistencyError("NA: horizon recursion says " + to_string(v) + ", exhaustive search says " +
                           to_string(global.verdict));
  return v == Verdict::Holds;
}

ArbitrageReport arbitrage_report(const ScenarioTree& tree, const AmbiguityKernel& kernel, const Integrand& psi,
                                 const NaOptions& opts, const ReportLimits& limits) {
  ArbitrageReport r;
  r.global = global_na_check(tree, kernel, psi, opts);
  r.horizon_dp = horizon_dp_verdict(tree, kernel, psi, opts);
  if (r.horizon_dp != Verdict::Inconclusive && r.global.verdict != Verdict::Inconclusive &&
      r.horizon_dp != r.global.verdict)
    throw ConsistencyError("NA: horizon recursion says " + to_string(r.horizon_dp) + ", exhaustive search says " +
                           to_string(r.global.verdict));

  const std::vector<double> zero(tree.horizon() * psi.action_dim(), 0.0);
  SelectionEnumerator en(tree, kernel);
  if (!psi.gain(0, zero) || en.count() > limits.max_scanned_selections) {
    r.per_selection_skipped = true;
  } else {
    do {
      SelectionScan s;
      s.selection = en.position();
      s.choice = en.current();
      s.witnesses = per_measure_scan(tree, kernel, psi, en.current(), opts);
      r.per_selection.push_back(std::move(s));
    } while (en.next());
  }

  for (std::size_t id = 0; id < tree.internal_count() && r.local_cones.size() < limits.max_cone_nodes; ++id) {
    const std::size_t t = tree.depth_of(id), i = tree.index_of(id);
    if (kernel.relevant(t, i)) r.local_cones.push_back(local_cone(tree, kernel, psi, t, i, opts));
  }
  return r;
}

}  // namespace robustdp
