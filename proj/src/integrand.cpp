#include "robustdp/integrand.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "robustdp/errors.hpp"

namespace robustdp {

double norm2(std::span<const double> a) noexcept {
  double s = 0.0;
  for (double v : a) s += v * v;
  return s;
}

bool tie_less(std::span<const double> a, std::span<const double> b) noexcept {
  const double na = norm2(a), nb = norm2(b);
  if (na != nb) return na < nb;
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

void sort_by_tie_break(std::vector<Point>& points) {
  std::sort(points.begin(), points.end(), [](const Point& a, const Point& b) { return tie_less(a, b); });
}

// ---------------------------------------------------------------- grid

std::vector<double> check_grid_condition(const GridDomain& domain) {
  constexpr double kGapTol = 1e-12;
  if (domain.periods.empty()) throw GridConditionViolation("grid condition: domain has no periods");
  if (!domain.declared_spacing.empty() && domain.declared_spacing.size() != domain.periods.size())
    throw GridConditionViolation("grid condition: one declared spacing per period is required");
  std::vector<double> spacing;
  for (std::size_t t = 0; t < domain.periods.size(); ++t) {
    const auto& pts = domain.periods[t];
    const std::string where = "grid condition violated in period " + std::to_string(t);
    if (pts.empty()) throw GridConditionViolation(where + ": no points");
    bool has_zero = false;
    for (const auto& p : pts) {
      if (p.size() != domain.dim) throw GridConditionViolation(where + ": point of wrong dimension");
      for (double v : p)
        if (!std::isfinite(v)) throw GridConditionViolation(where + ": non-finite coordinate");
      if (std::all_of(p.begin(), p.end(), [](double v) { return v == 0.0; })) has_zero = true;
    }
    if (!has_zero) throw GridConditionViolation(where + ": zero action missing");
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pts.size(); ++i)
      for (std::size_t j = i + 1; j < pts.size(); ++j) {
        if (pts[i] == pts[j]) continue;  // duplicates collapse
        double s = 0.0;
        for (std::size_t k = 0; k < domain.dim; ++k) s += (pts[i][k] - pts[j][k]) * (pts[i][k] - pts[j][k]);
        gap = std::min(gap, std::sqrt(s));
      }
    if (!(gap > kGapTol)) throw GridConditionViolation(where + ": zero spacing between distinct points");
    if (!domain.declared_spacing.empty()) {
      const double declared = domain.declared_spacing[t];
      // a single distinct point has no gap; any declared value is accepted
      if (std::isfinite(gap) && std::fabs(gap - declared) > kGapTol)
        throw GridConditionViolation(where + ": computed spacing " + std::to_string(gap) +
                                     " differs from declared " + std::to_string(declared));
    }
    spacing.push_back(gap);
  }
  return spacing;
}

// ---------------------------------------------------------------- strategies

std::vector<double> AdaptedStrategy::along_path(const ScenarioTree& tree, std::size_t leaf) const {
  const std::size_t T = tree.horizon();
  std::vector<double> x(T * dim);
  for (std::size_t t = 0; t < T; ++t) {
    auto a = at(tree.id(t, tree.ancestor(T, leaf, t)));
    std::copy(a.begin(), a.end(), x.begin() + static_cast<std::ptrdiff_t>(t * dim));
  }
  return x;
}

AdaptedStrategy zero_strategy(const ScenarioTree& tree, std::size_t dim) {
  return AdaptedStrategy{dim, std::vector<double>(tree.internal_count() * dim, 0.0)};
}

bool strategy_tie_less(const AdaptedStrategy& a, const AdaptedStrategy& b) noexcept {
  const std::size_t n = std::min(a.actions.size(), b.actions.size()) / std::max<std::size_t>(a.dim, 1);
  for (std::size_t i = 0; i < n; ++i) {
    auto x = a.at(i), y = b.at(i);
    if (tie_less(x, y)) return true;
    if (tie_less(y, x)) return false;
  }
  return false;
}

std::vector<std::vector<double>> enumerate_domain(const Integrand& psi, std::uint64_t limit) {
  const std::size_t T = psi.horizon();
  std::vector<std::vector<double>> out;
  std::vector<double> prefix;
  auto rec = [&](auto&& self, std::size_t t) -> void {
    if (t == T) {
      if (out.size() >= limit)
        throw BudgetError("domain enumeration exceeds " + std::to_string(limit) + " points", limit + 1, limit, true);
      out.push_back(prefix);
      return;
    }
    for (const auto& a : psi.feasible_actions(t, prefix)) {
      prefix.insert(prefix.end(), a.begin(), a.end());
      self(self, t + 1);
      prefix.resize(prefix.size() - a.size());
    }
  };
  rec(rec, 0);
  return out;
}

// ---------------------------------------------------------------- horizon

std::vector<double> default_radii_schedule() {
  std::vector<double> r;
  for (int e = 4; e <= 20; ++e) r.push_back(std::ldexp(1.0, e));
  return r;
}

namespace {

// s = 1/delta in (0, 1/n) with |s p - x| < 1/n; returns false if empty
bool admissible_inverse_scales(std::span<const double> p, std::span<const double> x, double n, double& lo,
                               double& hi) {
  double a = 0.0, b = 0.0, c = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    a += p[i] * p[i];
    b -= 2.0 * p[i] * x[i];
    c += x[i] * x[i];
  }
  c -= 1.0 / (n * n);
  const double cap = 1.0 / n;
  if (a == 0.0) {
    if (!(c < 0.0)) return false;
    lo = 0.0;
    hi = cap;
    return true;
  }
  const double disc = b * b - 4.0 * a * c;
  if (!(disc > 0.0)) return false;
  const double sq = std::sqrt(disc);
  // numerically stable roots
  const double q = -0.5 * (b + (b >= 0.0 ? sq : -sq));
  double r1 = q / a, r2 = (q != 0.0) ? c / q : -r1;
  if (r1 > r2) std::swap(r1, r2);
  lo = std::max(r1, 0.0);
  hi = std::min(r2, cap);
  return lo < hi;
}

// sup of value/delta over delta = 1/s, s in (lo, hi)
XReal ray_sup(XReal value, double lo, double hi) {
  if (value.is_neg_inf()) return NEG_INF;
  const double v = value.value();
  if (v > 0.0) return XReal(v * hi);
  if (v < 0.0) return XReal(v * lo);
  return XReal(0.0);
}

}  // namespace

HorizonEstimate horizon_numeric(const Integrand& psi, std::size_t leaf, std::span<const double> x,
                                std::span<const double> radii) {
  std::vector<double> schedule_storage;
  if (radii.empty()) {
    schedule_storage = default_radii_schedule();
    radii = schedule_storage;
  }
  const std::size_t k = psi.horizon() * psi.action_dim();
  if (x.size() != k) throw std::invalid_argument("horizon_numeric: x has wrong dimension");

  HorizonEstimate est;
  std::vector<XReal> values;
  values.reserve(radii.size());

  if (psi.domain_shape() == DomainShape::Finite) {
    const auto points = enumerate_domain(psi);
    std::vector<XReal> payoff;
    payoff.reserve(points.size());
    for (const auto& p : points) payoff.push_back(psi.evaluate(leaf, p));
    est.evaluations = points.size();
    for (double n : radii) {
      XReal best = NEG_INF;
      for (std::size_t j = 0; j < points.size(); ++j) {
        double lo, hi;
        if (!admissible_inverse_scales(points[j], x, n, lo, hi)) continue;
        best = xmax(best, ray_sup(payoff[j], lo, hi));
      }
      values.push_back(best);
    }
  } else {
    const auto spacing = psi.lattice_spacing();
    if (spacing.size() != k) throw std::logic_error("horizon_numeric: lattice spacing has wrong dimension");
    double rho = std::sqrt(norm2(spacing));
    const XReal at_zero = psi.evaluate_unbounded(leaf, std::vector<double>(k, 0.0));
    std::vector<double> z(k);
    for (double n : radii) {
      XReal best = NEG_INF;
      if (std::sqrt(norm2(x)) < 1.0 / n) best = ray_sup(at_zero, 0.0, 1.0 / n);
      const double delta0 = n * std::max(rho, 1.0) * (1.0 + 1e-6);
      for (int j = 0; j <= 20; ++j) {
        const double delta = std::ldexp(delta0, j);
        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << k); ++mask) {
          double dist = 0.0;
          for (std::size_t i = 0; i < k; ++i) {
            const double u = delta * x[i] / spacing[i];
            z[i] = spacing[i] * (((mask >> i) & 1u) ? std::ceil(u) : std::floor(u));
            dist += (z[i] - delta * x[i]) * (z[i] - delta * x[i]);
          }
          if (!(std::sqrt(dist) < delta / n)) continue;
          const XReal v = psi.evaluate_unbounded(leaf, z);
          ++est.evaluations;
          best = xmax(best, v.is_neg_inf() ? NEG_INF : XReal(v.value() / delta));
        }
      }
      values.push_back(best);
    }
  }

  // positive parts are at most C/n and vanish in the limit
  for (auto& v : values)
    if (v.is_finite() && v.value() > 0.0) v = XReal(0.0);

  est.value = values.empty() ? NEG_INF : values.back();
  if (values.size() >= 2) {
    const XReal a = values[values.size() - 2], b = values.back();
    est.stabilized = near(a, b, 1e-6);
  }
  return est;
}

XReal horizon_analytic(const Integrand& psi, std::size_t leaf, std::span<const double> x) {
  auto h = psi.analytic_horizon(leaf, x);
  if (!h) throw NotAvailable("no closed-form horizon registered for model '" + std::string(psi.tag()) + "'");
  return *h;
}

// ---------------------------------------------------------------- ingestion

bool verify_upper_bound(const Integrand& psi, std::size_t probes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto& tree = psi.tree();
  std::uniform_int_distribution<std::size_t> pick_leaf(0, tree.leaf_count() - 1);
  const double C = psi.upper_bound();
  std::vector<double> x;
  for (std::size_t n = 0; n < probes; ++n) {
    x.clear();
    for (std::size_t t = 0; t < tree.horizon(); ++t) {
      auto acts = psi.feasible_actions(t, x);
      if (acts.empty()) break;
      std::uniform_int_distribution<std::size_t> pick(0, acts.size() - 1);
      const auto& a = acts[pick(rng)];
      x.insert(x.end(), a.begin(), a.end());
    }
    if (x.size() != tree.horizon() * psi.action_dim()) continue;
    const XReal v = psi.evaluate(pick_leaf(rng), x);
    if (v > XReal(C)) return false;
  }
  return true;
}

IngestionSummary ingest_checks(const Integrand& psi, const AmbiguityKernel& kernel, std::size_t probes,
                               std::uint64_t seed) {
  IngestionSummary out;
  out.spacing = check_grid_condition(psi.grid());
  if (!std::isfinite(psi.upper_bound())) throw ConfigError("upper bound C must be finite");
  if (!verify_upper_bound(psi, probes, seed))
    throw ConfigError("model '" + std::string(psi.tag()) + "' exceeds its upper bound C = " +
                      std::to_string(psi.upper_bound()));
  out.bound_probes = probes;
  const auto& tree = psi.tree();
  const std::vector<double> zero(tree.horizon() * psi.action_dim(), 0.0);
  std::vector<XReal> leaf_values(tree.leaf_count());
  for (std::size_t l = 0; l < tree.leaf_count(); ++l) leaf_values[l] = psi.evaluate(l, zero);
  out.zero_strategy_value = robust_expectation(tree, kernel, leaf_values);
  if (out.zero_strategy_value.is_neg_inf())
    throw InfeasibleProblem("zero strategy has worst-case expected payoff -inf");
  return out;
}

}  // namespace robustdp
