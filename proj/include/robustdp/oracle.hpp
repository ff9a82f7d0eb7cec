#ifndef ROBUSTDP_ORACLE_HPP
#define ROBUSTDP_ORACLE_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "robustdp/integrand.hpp"
#include "robustdp/lattice.hpp"
#include "robustdp/models.hpp"

namespace robustdp {

struct EnumerationBudget {
  std::uint64_t strategies = 10000000;
  std::uint64_t selections = 1000000;
};

// Nodes with active[id] == false keep the first feasible action (in tie-break
// order); an empty mask means every internal node is free.
using NodeMask = std::vector<bool>;

// number of adapted strategies, saturating at UINT64_MAX
std::uint64_t count_adapted(const Integrand& psi, const NodeMask& active = {});

/// Visits every adapted strategy once. Order: global node ids, first node
/// most significant, each node's actions in tie-break order, so the visiting
/// order is the strategy tie-break order. Throws BudgetError (before visiting
/// anything) when the count exceeds `limit`.
void enumerate_adapted(const Integrand& psi, const std::function<void(const AdaptedStrategy&)>& visit,
                       std::uint64_t limit = EnumerationBudget{}.strategies, const NodeMask& active = {});

struct OracleResult {
  XReal value;
  AdaptedStrategy argmax;
  std::uint64_t strategies = 0;
  std::uint64_t selections = 0;
};

/// max over adapted strategies of min over kernel selections of the path
/// expectation. Among strategies within `tolerance` of the maximum the first
/// in tie-break order is returned. Bit-identical for any worker count.
OracleResult supinf_bruteforce(const ScenarioTree& tree, const AmbiguityKernel& kernel, const Integrand& psi,
                               const EnumerationBudget& budget = {}, unsigned workers = 1, double tolerance = 1e-9);

// min over selections of the path expectation of one fixed strategy
XReal oracle_value(const ScenarioTree& tree, const AmbiguityKernel& kernel, const Integrand& psi,
                   const AdaptedStrategy& h, const EnumerationBudget& budget = {});

struct StoppingOracleResult {
  XReal value;
  StoppingTime tau;
  std::uint64_t stopping_times = 0;
};

std::uint64_t count_stopping_times(const ScenarioTree& tree);

/// max over stopping times of min over selections of E[G_tau], read directly
/// from the payoff process.
StoppingOracleResult stopping_bruteforce(const ScenarioTree& tree, const AmbiguityKernel& kernel,
                                         const StoppingModel& model, const EnumerationBudget& budget = {},
                                         double tolerance = 1e-9);

}  // namespace robustdp

#endif
