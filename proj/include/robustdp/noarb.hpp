#ifndef ROBUSTDP_NOARB_HPP
#define ROBUSTDP_NOARB_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "robustdp/integrand.hpp"
#include "robustdp/lattice.hpp"

namespace robustdp {

enum class Verdict { Holds, Fails, Inconclusive };
std::string to_string(Verdict v);

struct NaOptions {
  std::uint64_t max_strategies = 10000000;
  unsigned workers = 1;
  double tolerance = 1e-9;
  // use horizon_numeric even when a closed form exists
  bool force_numeric = false;
};

// witness order: smallest total squared norm, then the earliest nonzero
// coordinate, then a positive one, then the strategy tie-break
bool witness_less(const AdaptedStrategy& a, const AdaptedStrategy& b) noexcept;

struct GlobalNa {
  Verdict verdict = Verdict::Inconclusive;
  std::optional<AdaptedStrategy> witness;
  std::uint64_t strategies = 0;
  std::string method;  // "analytic" or "numeric"
};

/// Exhaustive search over adapted strategies in the window for H != 0 on a
/// relevant node with Psi^inf(H) >= 0 on every relevant leaf. Nodes that are
/// unreachable under every selection are held at their first action.
GlobalNa global_na_check(const ScenarioTree& tree, const AmbiguityKernel& kernel, const Integrand& psi,
                         const NaOptions& opts = {});

/// Window strategies with gain >= 0 on every positive-probability leaf of the
/// selection and > 0 on one, in witness order. Needs a gain-form model.
std::vector<AdaptedStrategy> per_measure_scan(const ScenarioTree& tree, const AmbiguityKernel& kernel,
                                              const Integrand& psi, const KernelSelection& sel,
                                              const NaOptions& opts = {});

struct LocalCone {
  std::size_t depth = 0, index = 0;
  bool exact = false;  // false: upper-bound surrogate inf E[Psi_T^inf]
  std::vector<Point> members;
};

LocalCone local_cone(const ScenarioTree& tree, const AmbiguityKernel& kernel, const Integrand& psi, std::size_t t,
                     std::size_t index, const NaOptions& opts = {});

/// Backward recursion on (node, prefix) deciding whether some strategy that is
/// nonzero on a relevant node keeps the horizon value at 0 q.s.
Verdict horizon_dp_verdict(const ScenarioTree& tree, const AmbiguityKernel& kernel, const Integrand& psi,
                           const NaOptions& opts = {});

// true when NA holds per the recursion; throws ConsistencyError if it
// contradicts a decided global_na_check verdict
bool horizon_dp_check(const ScenarioTree& tree, const AmbiguityKernel& kernel, const Integrand& psi,
                      const GlobalNa& global, const NaOptions& opts = {});

struct SelectionScan {
  std::uint64_t selection = 0;  // position in SelectionEnumerator order
  KernelSelection choice;
  std::vector<AdaptedStrategy> witnesses;
};

struct ArbitrageReport {
  GlobalNa global;
  Verdict horizon_dp = Verdict::Inconclusive;
  std::vector<SelectionScan> per_selection;  // empty unless gain-form and few selections
  bool per_selection_skipped = false;
  std::vector<LocalCone> local_cones;  // relevant internal nodes
};

struct ReportLimits {
  std::uint64_t max_scanned_selections = 64;
  std::size_t max_cone_nodes = 256;
};

ArbitrageReport arbitrage_report(const ScenarioTree& tree, const AmbiguityKernel& kernel, const Integrand& psi,
                                 const NaOptions& opts = {}, const ReportLimits& limits = {});

}  // namespace robustdp

#endif
