#ifndef ROBUSTDP_INTEGRAND_HPP
#define ROBUSTDP_INTEGRAND_HPP

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "robustdp/lattice.hpp"
#include "robustdp/xreal.hpp"

namespace robustdp {

// One period's action, a point of R^d.
using Point = std::vector<double>;

double norm2(std::span<const double> a) noexcept;

// Shared tie-break: smaller Euclidean norm first, then lexicographic.
bool tie_less(std::span<const double> a, std::span<const double> b) noexcept;
void sort_by_tie_break(std::vector<Point>& points);

/// Per-period finite action sets D_0, ..., D_{T-1} in R^d.
struct GridDomain {
  std::size_t dim = 1;
  std::vector<std::vector<Point>> periods;
  // expected minimum gap per period; empty means "whatever is computed"
  std::vector<double> declared_spacing;
};

/// Minimum Euclidean gap between distinct points of each period.
/// Exact duplicates collapse. Throws GridConditionViolation when a period is
/// empty, lacks the zero action, has a gap that is not > 1e-12 between
/// distinct points, or disagrees with the declared spacing by more than 1e-12.
std::vector<double> check_grid_condition(const GridDomain& domain);

/// Adapted strategy on a scenario tree: one d-vector per internal node,
/// stored node-major by global id.
struct AdaptedStrategy {
  std::size_t dim = 1;
  std::vector<double> actions;

  std::span<const double> at(std::size_t id) const { return {actions.data() + id * dim, dim}; }
  std::span<double> at(std::size_t id) { return {actions.data() + id * dim, dim}; }
  // x in R^{dT} realised along the path to `leaf`
  std::vector<double> along_path(const ScenarioTree& tree, std::size_t leaf) const;
};

AdaptedStrategy zero_strategy(const ScenarioTree& tree, std::size_t dim);
// tie-break over whole strategies: node order, each action by tie_less
bool strategy_tie_less(const AdaptedStrategy& a, const AdaptedStrategy& b) noexcept;

enum class DomainShape {
  Finite,   // D is the finite feasible set itself
  Lattice,  // the model's D is a full lattice spacing*Z^{dT}; the window only truncates it
};

/// Terminal payoff Psi(omega, x) for x in R^{dT}, with its feasible set, the
/// upper bound C and (optionally) a closed-form horizon function.
class Integrand {
 public:
  explicit Integrand(std::shared_ptr<const ScenarioTree> tree) : tree_(std::move(tree)) {}
  virtual ~Integrand() = default;

  const ScenarioTree& tree() const noexcept { return *tree_; }
  const std::shared_ptr<const ScenarioTree>& tree_ptr() const noexcept { return tree_; }
  std::size_t horizon() const noexcept { return tree_->horizon(); }

  virtual std::string_view tag() const = 0;
  virtual std::size_t action_dim() const = 0;
  virtual double upper_bound() const = 0;
  virtual const GridDomain& grid() const = 0;

  // actions a with (prefix, a) extendable to a point of D; prefix has t*d entries
  virtual std::vector<Point> feasible_actions(std::size_t t, std::span<const double> prefix) const = 0;
  virtual bool in_domain(std::span<const double> x) const = 0;
  // Psi on the (windowed) domain, NEG_INF outside it
  virtual XReal evaluate(std::size_t leaf, std::span<const double> x) const = 0;

  virtual DomainShape domain_shape() const { return DomainShape::Finite; }
  // Psi on the untruncated lattice (Lattice shape only)
  virtual XReal evaluate_unbounded(std::size_t leaf, std::span<const double> x) const { return evaluate(leaf, x); }
  // per-coordinate lattice spacing, dT entries (Lattice shape only)
  virtual std::vector<double> lattice_spacing() const { return {}; }

  virtual std::optional<XReal> analytic_horizon(std::size_t /*leaf*/, std::span<const double> /*x*/) const {
    return std::nullopt;
  }
  // pathwise trading gain for gain-form payoffs U(x0 + gain)
  virtual std::optional<double> gain(std::size_t /*leaf*/, std::span<const double> /*x*/) const {
    return std::nullopt;
  }
  // same model with every action window doubled; nullptr when the domain is intrinsic
  virtual std::unique_ptr<Integrand> with_doubled_window() const { return nullptr; }

  XReal evaluate_strategy(std::size_t leaf, const AdaptedStrategy& h) const {
    return evaluate(leaf, h.along_path(tree(), leaf));
  }

 private:
  std::shared_ptr<const ScenarioTree> tree_;
};

// ------------------------------------------------------------------ horizon

struct HorizonEstimate {
  XReal value;
  bool stabilized = false;
  std::size_t evaluations = 0;
};

std::vector<double> default_radii_schedule();  // 2^4, ..., 2^20

/// Numeric evaluation of lim_n sup_{delta > n, |x - y| < 1/n} Psi(delta y)/delta.
///
/// For finite domains the inner sup is exact per n: for each feasible point p
/// the admissible delta form an interval and Psi(p)/delta is monotone on it.
/// For lattice domains the sup is taken over the 2^{dT} lattice corners of
/// delta*x on a geometric delta grid (a lower bound of the sup). Positive
/// contributions are bounded by C/n and are clipped to 0. Stabilised when the
/// last two schedule values agree within 1e-6 or are both NEG_INF.
HorizonEstimate horizon_numeric(const Integrand& psi, std::size_t leaf, std::span<const double> x,
                                std::span<const double> radii = {});

// closed form; throws NotAvailable when the integrand has none
XReal horizon_analytic(const Integrand& psi, std::size_t leaf, std::span<const double> x);

// ------------------------------------------------------------------ ingestion

struct IngestionSummary {
  std::vector<double> spacing;
  XReal zero_strategy_value;  // inf_P E^P[Psi(0)]
  std::size_t bound_probes = 0;
};

/// Grid condition, upper bound C on random probes, and
/// inf_P E^P[Psi(0)] > -inf. Throws GridConditionViolation / ConfigError /
/// InfeasibleProblem respectively.
IngestionSummary ingest_checks(const Integrand& psi, const AmbiguityKernel& kernel, std::size_t probes = 10000,
                               std::uint64_t seed = 0x5eed);

// uniformly chosen feasible continuation of every node; deterministic in rng
template <class Rng>
AdaptedStrategy random_adapted_strategy(const Integrand& psi, Rng& rng);

// every point of the (windowed) domain D, in depth-first feasible-action order;
// throws BudgetError beyond `limit` points
std::vector<std::vector<double>> enumerate_domain(const Integrand& psi, std::uint64_t limit = 1u << 22);

// random leaf + random feasible point; evaluate <= C on each
bool verify_upper_bound(const Integrand& psi, std::size_t probes, std::uint64_t seed);

}  // namespace robustdp

#include "robustdp/detail/random_strategy.hpp"

#endif
