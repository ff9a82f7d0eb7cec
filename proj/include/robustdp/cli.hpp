#ifndef ROBUSTDP_CLI_HPP
#define ROBUSTDP_CLI_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

#include "robustdp/integrand.hpp"
#include "robustdp/lattice.hpp"

namespace robustdp::cli {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kVersion = "1.0.0";

enum ExitCode : int {
  kOk = 0,
  kInternal = 1,  // also: oracle disagrees with the solver
  kInfeasible = 2,
  kValidation = 3,
  kBudget = 4,
  kInconclusive = 5,
  kExpectation = 6,
};

struct SolverConfig {
  double tolerance = 1e-9;
  unsigned workers = 1;
  bool doubling_check = true;
  std::uint64_t budget_strategies = 10000000;
  std::uint64_t budget_selections = 1000000;
};

// command-line flags; they override the config's solver block
struct Overrides {
  std::optional<unsigned> workers;
  std::optional<std::uint64_t> budget_strategies;
  std::optional<std::uint64_t> budget_selections;
  bool no_doubling_check = false;
};

struct Problem {
  json effective;  // config with overrides applied, worker count removed
  std::string hash;
  std::shared_ptr<const ScenarioTree> tree;
  std::shared_ptr<const AmbiguityKernel> kernel;
  std::shared_ptr<const Integrand> model;
  SolverConfig solver;
  json expect;
};

// throws ConfigError (or GridConditionViolation) on any schema violation
Problem load_problem(const json& doc, const Overrides& ov = {});
json read_json_file(const std::string& path);

// FNV-1a 64 of the canonical dump, as 16 hex digits
std::string config_hash(const json& doc);

// doubles as JSON numbers, NEG_INF as the string "-inf"
json to_json(XReal v);

struct CommandResult {
  json report;
  int exit_code = kOk;
  std::string diagnostics;  // for standard error
};

// "solve", "oracle", "na-check", "dump-values"; never throws
CommandResult run_command(const std::string& command, const json& doc, const Overrides& ov = {});

std::string serialize(const json& report);

}  // namespace robustdp::cli

#endif
